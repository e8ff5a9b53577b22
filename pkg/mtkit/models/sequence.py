"""
Modelos de sucesiones en el disco
Puntos del disco, sucesiones indexadas y tablas de fases acumuladas
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, List, Optional, Union
import numpy as np

from mtkit.config import settings, constants
from mtkit.exceptions import InvalidArgumentError
from mtkit.models.circle import CircleGrid, _frozen_array


class DiskPoint(BaseModel):
    """Punto w = |w| e^{i arg w} con |w| < 1"""
    modulus: float = Field(
        ...,
        ge=0.0,
        description="Módulo en [0, 1)"
    )
    angle: float = Field(
        0.0,
        description="Argumento en radianes"
    )

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "modulus": 0.9,
                "angle": 0.3
            }
        }

    @field_validator("modulus")
    @classmethod
    def validate_modulus(cls, v: float) -> float:
        if not np.isfinite(v) or v >= settings.modulus_cap:
            raise ValueError(f"modulus must be < {settings.modulus_cap!r}, got {v!r}")
        return v

    @property
    def value(self) -> complex:
        return complex(self.modulus * np.exp(1j * self.angle))

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(modulus=float(abs(z)), angle=float(np.angle(z)))


PointLike = Union[DiskPoint, complex, float]


def as_complex(w: PointLike) -> complex:
    """Acepta DiskPoint o número complejo"""
    if isinstance(w, DiskPoint):
        return w.value
    return complex(w)


class MTSequence(BaseModel):
    """Sucesión finita a_{i_min}, …, a_{i_max} de puntos del disco"""
    points: np.ndarray
    i_min: int = 1
    kind: str = constants.KIND_CUSTOM
    params: Dict[str, float] = Field(default_factory=dict)

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("points", mode="before")
    @classmethod
    def coerce_points(cls, v):
        arr = np.asarray(v, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("points must be finite")
        if arr.size and np.max(np.abs(arr)) >= settings.modulus_cap:
            raise ValueError(f"every point must have modulus < {settings.modulus_cap!r}")
        return _frozen_array(arr)

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str) -> str:
        if v not in constants.SEQUENCE_KINDS:
            raise ValueError(f"kind must be one of {constants.SEQUENCE_KINDS}")
        return v

    @property
    def length(self) -> int:
        return int(self.points.shape[0])

    @property
    def i_max(self) -> int:
        return self.i_min + self.length - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1)

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.points))) if self.length else 0.0

    def point(self, n: int) -> complex:
        """Punto a_n"""
        if not self.i_min <= n <= self.i_max:
            raise InvalidArgumentError(
                f"index {n} outside sequence range [{self.i_min}, {self.i_max}]"
            )
        return complex(self.points[n - self.i_min])

    def disk_point(self, n: int) -> DiskPoint:
        return DiskPoint.from_complex(self.point(n))


class PhaseTable(BaseModel):
    """Fases acumuladas ψ_n(θ_j) para n = i_min − 1, …, i_max (fila 0 idénticamente nula)"""
    sequence: MTSequence
    grid: CircleGrid
    psi: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("psi", mode="before")
    @classmethod
    def coerce_psi(cls, v):
        return _frozen_array(np.asarray(v, dtype=np.float64))

    @model_validator(mode="after")
    def check_shape(self):
        expected = (self.sequence.length + 1, self.grid.n_points)
        if self.psi.shape != expected:
            raise ValueError(f"psi must have shape {expected}, got {self.psi.shape}")
        return self

    @property
    def first_index(self) -> int:
        return self.sequence.i_min - 1

    @property
    def last_index(self) -> int:
        return self.sequence.i_max

    def row_position(self, n):
        """Posición de la fila de ψ_n; acepta enteros o arreglos de enteros"""
        n_arr = np.asarray(n)
        if np.any(n_arr < self.first_index) or np.any(n_arr > self.last_index):
            raise InvalidArgumentError(
                f"phase index outside table range [{self.first_index}, {self.last_index}]"
            )
        return n_arr - self.first_index

    def row(self, n: int) -> np.ndarray:
        return self.psi[int(self.row_position(n))]

    def phase(self, n: int) -> np.ndarray:
        """e^{iψ_n} sobre la malla"""
        return np.exp(1j * self.row(n))


# ============= MODELOS DE LA API =============

class SequenceRequest(BaseModel):
    """Parámetros para generar una sucesión"""
    kind: str = Field(..., description="a_r, b, d_r o custom")
    r: Optional[float] = Field(None, gt=0.5, lt=1.0, description="Radio para a_r y d_r")
    length: Optional[int] = Field(None, ge=1, description="Truncamiento para b")
    extended: bool = Field(False, description="Índices negativos desde −K para a_r")
    points_re: List[float] = Field(default_factory=list)
    points_im: List[float] = Field(default_factory=list)

    class Config:
        json_schema_extra = {
            "example": {
                "kind": "a_r",
                "r": 0.75,
                "extended": False
            }
        }


class PointOut(BaseModel):
    """Punto de una sucesión en formato de respuesta"""
    index: int
    modulus: float
    angle: float


class SequenceResponse(BaseModel):
    """Sucesión generada"""
    kind: str
    i_min: int
    i_max: int
    params: Dict[str, float]
    points: List[PointOut]
