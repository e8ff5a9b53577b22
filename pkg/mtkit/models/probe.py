"""
Modelos de la sonda de la demostración
Configuración de τ/η, sucesiones dispersas del caso modelo y pares asociados
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional
import math
import numpy as np

from mtkit.models.circle import GridFunction, _frozen_array
from mtkit.models.levels import LevelFunction


class ProbeConfig(BaseModel):
    """Parámetros r, Λ y resolución de la sonda"""
    r: float = Field(..., gt=0.5, lt=1.0, description="Radio de la sucesión a_r")
    lam: int = Field(8, ge=4, description="Dilatación Λ (entero par)")
    points_per_cell: int = Field(4, ge=1, description="Puntos de malla por celda de longitud 2π(1−r)")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "r": 0.998046875,
                "lam": 8,
                "points_per_cell": 4
            }
        }

    @field_validator("lam")
    @classmethod
    def validate_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError(f"dilation must be even, got {v}")
        return v

    @model_validator(mode="after")
    def check_level_bound(self):
        if self.level_bound < 1:
            raise ValueError(
                f"level bound floor(1/(16·{self.lam}·(1−r))) is zero; take r closer to 1"
            )
        return self

    @property
    def eps(self) -> float:
        return 1.0 - self.r

    @property
    def cell_width(self) -> float:
        return 2.0 * math.pi * self.eps

    @property
    def K(self) -> int:
        return int(math.floor(1.0 / (4.0 * self.eps) + 1e-9))

    @property
    def level_bound(self) -> int:
        return int(math.floor(1.0 / (16.0 * self.lam * self.eps) + 1e-9))

    @property
    def half_interval(self) -> float:
        """Semiancho del intervalo [−1/(2Λ), 1/(2Λ)]"""
        return 1.0 / (2.0 * self.lam)

    @property
    def cells(self) -> Optional[int]:
        """Número de celdas en el círculo si 1/(1 − r) es entero"""
        value = 1.0 / self.eps
        rounded = int(round(value))
        return rounded if abs(value - rounded) < 1e-9 else None


class SparseSeq(BaseModel):
    """α con soporte creciente y valores reales"""
    support: np.ndarray
    values: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("support", "values", mode="before")
    @classmethod
    def coerce(cls, v):
        arr = np.asarray(v, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("entries must be finite")
        return _frozen_array(arr)

    @model_validator(mode="after")
    def check_support(self):
        if self.support.shape != self.values.shape:
            raise ValueError("support and values must have the same length")
        if self.support.size and self.support[0] < 0:
            raise ValueError("support must be nonnegative")
        if np.any(np.diff(self.support) <= 0):
            raise ValueError("support must be strictly increasing")
        return self

    @property
    def size(self) -> int:
        return int(self.support.shape[0])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2)))


class AssociatedPairs(BaseModel):
    """(f, M), (g̃, Ñ), (f̃, M̃) construidos a partir de (g, N)"""
    E: np.ndarray
    p: np.ndarray
    f: GridFunction
    M: LevelFunction
    g_tilde: GridFunction
    N_tilde: LevelFunction
    f_tilde: GridFunction
    M_tilde: LevelFunction
    M_tilde_identity: LevelFunction

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class ProbeReport(BaseModel):
    """Valor de Σ y sus cuatro términos"""
    sigma: float
    B_g: float
    B_g_tilde: float
    B_f: float
    B_f_tilde: float
    g_norm_sq: float

    @property
    def ratio(self) -> float:
        return self.sigma / self.g_norm_sq if self.g_norm_sq else 0.0
