"""
Modelos del círculo
Malla uniforme, funciones muestreadas y su espectro
"""
from pydantic import BaseModel, Field, field_validator, model_validator
import numpy as np


def is_power_of_two(n: int) -> bool:
    """Verifica si n es potencia de dos"""
    return n >= 1 and (n & (n - 1)) == 0


def _frozen_array(values, dtype=None) -> np.ndarray:
    """Copia el arreglo y lo marca como de solo lectura"""
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


class CircleGrid(BaseModel):
    """Malla uniforme θ_j = 2πj/N del círculo"""
    n_points: int = Field(
        ...,
        ge=2,
        description="Número de puntos de la malla (potencia de dos)"
    )

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "n_points": 1024
            }
        }

    @field_validator("n_points")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        if not is_power_of_two(v):
            raise ValueError(f"n_points must be a power of two, got {v}")
        return v

    @property
    def step(self) -> float:
        return 2.0 * np.pi / self.n_points

    @property
    def points(self) -> np.ndarray:
        """Ángulos θ_j en [0, 2π)"""
        return self.step * np.arange(self.n_points)

    @property
    def symmetric_indices(self) -> np.ndarray:
        """Índices j reducidos a (−N/2, N/2]"""
        j = np.arange(self.n_points)
        return np.where(j > self.n_points // 2, j - self.n_points, j)

    @property
    def symmetric_points(self) -> np.ndarray:
        """Ángulos reducidos a (−π, π]"""
        return self.step * self.symmetric_indices

    @property
    def frequencies(self) -> np.ndarray:
        """Frecuencias enteras en el orden de la FFT; −N/2 cuenta como negativa"""
        k = np.arange(self.n_points)
        return np.where(k >= self.n_points // 2, k - self.n_points, k)

    def same_as(self, other: "CircleGrid") -> bool:
        return self.n_points == other.n_points


class GridFunction(BaseModel):
    """Valores (complejos o reales) de una función en los puntos de la malla"""
    grid: CircleGrid
    values: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("values", mode="before")
    @classmethod
    def coerce_values(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 1:
            raise ValueError("values must be one-dimensional")
        dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
        return _frozen_array(arr, dtype=dtype)

    @model_validator(mode="after")
    def check_against_grid(self):
        if self.values.shape[0] != self.grid.n_points:
            raise ValueError(
                f"values has {self.values.shape[0]} samples, grid has {self.grid.n_points}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        return self

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    def norm(self) -> float:
        """Norma L² normalizada: sqrt((1/N) Σ |f_j|²)"""
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(grid=self.grid, values=values)


class SpectrumFunction(BaseModel):
    """Coeficientes f̂(k) para k ∈ [−N/2, N/2) en orden creciente"""
    grid: CircleGrid
    coefficients: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("coefficients", mode="before")
    @classmethod
    def coerce_coefficients(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        return _frozen_array(arr, dtype=np.complex128)

    @model_validator(mode="after")
    def check_against_grid(self):
        if self.coefficients.shape[0] != self.grid.n_points:
            raise ValueError("coefficient count must equal the grid size")
        return self

    @property
    def frequencies(self) -> np.ndarray:
        half = self.grid.n_points // 2
        return np.arange(-half, half)

    def coefficient(self, k: int) -> complex:
        """Coeficiente de la frecuencia k"""
        half = self.grid.n_points // 2
        if not -half <= k < half:
            raise ValueError(f"frequency {k} outside [{-half}, {half})")
        return complex(self.coefficients[k + half])
