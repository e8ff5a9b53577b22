"""
Modelo de funciones de nivel
N(x) entero por punto de la malla (linealización del operador maximal)
"""
from pydantic import BaseModel, field_validator, model_validator
import numpy as np

from mtkit.models.circle import CircleGrid, _frozen_array


class LevelFunction(BaseModel):
    """Función N: malla → {lower, …, upper}"""
    grid: CircleGrid
    levels: np.ndarray
    lower: int
    upper: int

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("levels", mode="before")
    @classmethod
    def coerce_levels(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 1:
            raise ValueError("levels must be one-dimensional")
        if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("levels must be integers")
        return _frozen_array(arr, dtype=np.int64)

    @model_validator(mode="after")
    def check_range(self):
        if self.levels.shape[0] != self.grid.n_points:
            raise ValueError("levels must have one entry per grid point")
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if self.levels.size and (self.levels.min() < self.lower or self.levels.max() > self.upper):
            bad = int(np.flatnonzero((self.levels < self.lower) | (self.levels > self.upper))[0])
            raise ValueError(
                f"level {int(self.levels[bad])} at grid index {bad} outside [{self.lower}, {self.upper}]"
            )
        return self

    @classmethod
    def constant(cls, grid: CircleGrid, level: int) -> "LevelFunction":
        return cls(grid=grid, levels=np.full(grid.n_points, level), lower=level, upper=level)

    @property
    def occurring_levels(self) -> np.ndarray:
        return np.unique(self.levels)

    def level_set(self, m: int) -> np.ndarray:
        """Indicador booleano de A_m = {x : N(x) = m}"""
        return self.levels == m
