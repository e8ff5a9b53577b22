"""
Servicio del caso modelo
Forma bilineal T(α) sobre sucesiones dispersas y su construcción por dilatación
"""
import logging
import math

import numpy as np

from mtkit.config import settings
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.probe import SparseSeq

logger = logging.getLogger(__name__)

# mayor entero representable sin pérdida en doble precisión
EXACT_INTEGER_LIMIT = 2.0 ** 53


def model_T(alpha: SparseSeq, block: int = 1024) -> float:
    """
    T(α) = −Σ_{j<j′} α_j α_{j′} sin(log(j′ − j)/2π)/(j′ − j)

    Suma exacta sobre pares del soporte, por bloques de filas en orden fijo.
    """
    n = alpha.size
    if n > settings.model_max_support:
        raise ResourceGuardError(
            f"model form limited to {settings.model_max_support} support points, got {n}",
            required=n,
            limit=settings.model_max_support
        )

    support = alpha.support
    values = alpha.values
    total = 0.0
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        gaps = support[None, :] - support[rows][:, None]
        upper = gaps > 0
        safe = np.where(upper, gaps, 1.0)
        terms = np.where(upper, np.sin(np.log(safe) / (2.0 * math.pi)) / safe, 0.0)
        total += float(np.sum(values[rows][:, None] * values[None, :] * terms))
    return -total


def model_dilate(alpha: SparseSeq, lam: float) -> SparseSeq:
    """β_{[Λj]} = α_j y β = 0 fuera de esos índices"""
    if lam < 1.0:
        raise InvalidArgumentError(f"dilation must be at least 1, got {lam}")
    if alpha.size and lam * float(alpha.support[-1]) >= EXACT_INTEGER_LIMIT:
        raise InvalidArgumentError(
            f"Λ·max index = {lam * float(alpha.support[-1]):.6g} exceeds the exact integer range"
        )
    support = np.floor(lam * alpha.support)
    return SparseSeq(support=support, values=alpha.values.copy())


def dilation_deviation(alpha: SparseSeq, lam: float) -> dict:
    """|T(β) + T(α)/Λ| relativo a |T(α)/Λ|"""
    t_alpha = model_T(alpha)
    t_beta = model_T(model_dilate(alpha, lam))
    expected = -t_alpha / lam
    deviation = abs(t_beta - expected) / abs(expected) if expected != 0.0 else abs(t_beta)
    return {"T_alpha": t_alpha, "T_beta": t_beta, "deviation": deviation}


def random_sparse(rng: np.random.Generator, size: int, min_gap: int) -> SparseSeq:
    """Soporte desde 0 con huecos en [min_gap, 2·min_gap) y valores gaussianos"""
    if size < 1 or min_gap < 1:
        raise InvalidArgumentError("size and min_gap must be positive")
    gaps = rng.integers(min_gap, 2 * min_gap, size=size - 1)
    support = np.concatenate([[0], np.cumsum(gaps)]).astype(np.float64)
    return SparseSeq(support=support, values=rng.standard_normal(size))
