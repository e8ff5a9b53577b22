"""
Modelos del sistema de Malmquist-Takenaka
Base evaluada en la malla, expansiones y resultado del operador maximal
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional
import numpy as np

from mtkit.exceptions import InvalidArgumentError
from mtkit.models.circle import CircleGrid, GridFunction, _frozen_array
from mtkit.models.levels import LevelFunction
from mtkit.models.sequence import MTSequence, PhaseTable, SequenceRequest


class MTBasis(BaseModel):
    """φ_n(e^{iθ_j}) para n = i_min − 1, …, i_max − 1 (una fila por índice)"""
    table: PhaseTable
    phi: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("phi", mode="before")
    @classmethod
    def coerce_phi(cls, v):
        return _frozen_array(np.asarray(v, dtype=np.complex128))

    @model_validator(mode="after")
    def check_shape(self):
        expected = (self.table.sequence.length, self.table.grid.n_points)
        if self.phi.shape != expected:
            raise ValueError(f"phi must have shape {expected}, got {self.phi.shape}")
        return self

    @property
    def sequence(self) -> MTSequence:
        return self.table.sequence

    @property
    def grid(self) -> CircleGrid:
        return self.table.grid

    @property
    def first_index(self) -> int:
        return self.sequence.i_min - 1

    @property
    def last_index(self) -> int:
        return self.sequence.i_max - 1

    @property
    def size(self) -> int:
        return self.sequence.length

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first_index, self.last_index + 1)

    def position(self, n: int) -> int:
        if not self.first_index <= n <= self.last_index:
            raise InvalidArgumentError(
                f"basis index {n} outside [{self.first_index}, {self.last_index}]"
            )
        return n - self.first_index

    def function(self, n: int) -> GridFunction:
        """φ_n como GridFunction"""
        return GridFunction(grid=self.grid, values=self.phi[self.position(n)])


class MTExpansion(BaseModel):
    """Coeficientes ⟨f, φ_n⟩ para n = first_index, …, first_index + len − 1"""
    basis: MTBasis
    coefficients: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("coefficients", mode="before")
    @classmethod
    def coerce_coefficients(cls, v):
        return _frozen_array(np.asarray(v, dtype=np.complex128))

    @property
    def first_index(self) -> int:
        return self.basis.first_index

    @property
    def last_index(self) -> int:
        return self.first_index + self.coefficients.shape[0] - 1

    def coefficient(self, n: int) -> complex:
        return complex(self.coefficients[self.basis.position(n)])

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


class MaximalResult(BaseModel):
    """sup_n |S_n f| y el índice (mínimo) donde se alcanza"""
    values: GridFunction
    levels: LevelFunction


# ============= MODELOS DE LA API =============

class OrthonormalityRequest(BaseModel):
    """Reporte de ortonormalidad de una base"""
    sequence: SequenceRequest
    grid: int = Field(1024, ge=2, description="Tamaño de la malla (potencia de dos)")
    unsafe: bool = Field(False, description="Omitir la guarda de resolución")

    class Config:
        json_schema_extra = {
            "example": {
                "sequence": {"kind": "a_r", "r": 0.9375},
                "grid": 1024,
                "unsafe": False
            }
        }


class OrthonormalityResponse(BaseModel):
    """Desviación máxima de la matriz de Gram respecto de la identidad"""
    n_functions: int
    grid: int
    max_deviation: float
    required_grid: Optional[int] = None
