"""
Modelos del desenrollado de fase
Polinomios analíticos, pasos de factorización de Blaschke y comparación con la serie MT
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Optional
import numpy as np
from numpy.polynomial import polynomial as P

from mtkit.config import settings
from mtkit.models.circle import _frozen_array


class PolynomialH2(BaseModel):
    """F(z) = Σ c_k z^k con coeficiente principal no nulo (el polinomio cero es [0])"""
    coefficients: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("coefficients", mode="before")
    @classmethod
    def normalize(cls, v):
        arr = np.atleast_1d(np.asarray(v, dtype=np.complex128)).reshape(-1)
        if arr.size == 0:
            arr = np.zeros(1, dtype=np.complex128)
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        nonzero = np.flatnonzero(arr)
        last = int(nonzero[-1]) + 1 if nonzero.size else 1
        return _frozen_array(arr[:last])

    @property
    def degree(self) -> int:
        return int(self.coefficients.shape[0]) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coefficients[0] == 0

    def at_zero(self) -> complex:
        return complex(self.coefficients[0])

    def evaluate(self, z):
        return P.polyval(np.asarray(z, dtype=np.complex128), self.coefficients)

    def norm(self) -> float:
        """Norma H² = norma ℓ² de los coeficientes"""
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def without_constant(self) -> "PolynomialH2":
        """F − F(0)"""
        coefficients = self.coefficients.copy()
        coefficients[0] = 0.0
        return PolynomialH2(coefficients=coefficients)


class BlaschkeFactorization(BaseModel):
    """p = B·q con B el producto de Blaschke de las raíces interiores"""
    roots: List[complex]
    quotient: PolynomialH2
    remainders: List[float]

    @property
    def max_remainder(self) -> float:
        return max(self.remainders, default=0.0)


class UnwindStep(BaseModel):
    """Paso k: F_k, su valor F_k(0) y las raíces del bloque B_{k+1} que produce"""
    k: int
    polynomial: PolynomialH2
    constant: complex
    roots: List[complex] = Field(default_factory=list)
    remainder: float = 0.0

    def record(self) -> dict:
        """Registro JSON-lines del paso"""
        return {
            "k": self.k,
            "Fk0_re": self.constant.real,
            "Fk0_im": self.constant.imag,
            "roots": [{"re": root.real, "im": root.imag} for root in self.roots],
            "remainder": self.remainder
        }


class UnwindingResult(BaseModel):
    """F = Σ_k F_k(0) B_1⋯B_k + residuo·B_1⋯B_n"""
    polynomial: PolynomialH2
    steps: List[UnwindStep]
    residual: PolynomialH2
    terminated: bool

    @property
    def constants(self) -> List[complex]:
        return [step.constant for step in self.steps]

    @property
    def blocks(self) -> List[List[complex]]:
        return [step.roots for step in self.steps if step.roots]

    @property
    def diagnostics(self) -> List[float]:
        return [step.remainder for step in self.steps if step.roots]

    @model_validator(mode="after")
    def check_roots_inside(self):
        for block in self.blocks:
            if any(abs(root) >= 1.0 for root in block):
                raise ValueError("every block root must lie inside the unit disk")
        return self


class MTComparison(BaseModel):
    """Discrepancia L² entre sumas de desenrollado y sumas MT en las fronteras de bloque"""
    boundaries: List[int]
    discrepancies: List[float]
    n_points: int
    resolved: bool

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies, default=0.0)


# ============= MODELOS DE LA API =============

class UnwindRequest(BaseModel):
    """Polinomio a desenrollar"""
    coefficients_re: List[float] = Field(..., min_length=1)
    coefficients_im: Optional[List[float]] = None
    steps: int = Field(10, ge=0, le=64)
    grid: int = Field(1024, ge=2, le=settings.unwind_max_grid, description="Malla para la comparación MT")

    class Config:
        json_schema_extra = {
            "example": {
                "coefficients_re": [1.0, 1.0, -2.5, 1.0],
                "steps": 10,
                "grid": 1024
            }
        }


class UnwindResponse(BaseModel):
    """Pasos del desenrollado y métricas"""
    steps: List[dict]
    terminated: bool
    residual_norm: float
    bessel_gap: float
    telescoping_error: float
    max_mt_discrepancy: Optional[float] = None
