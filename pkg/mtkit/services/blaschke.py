"""
Servicio de fases de Blaschke
Fases de Möbius Ψ_w, sus derivadas, fases acumuladas ψ_n, productos de Blaschke y el índice de celda k(x)
"""
import logging
from typing import Optional

import numpy as np

from mtkit.config import settings
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.circle import CircleGrid
from mtkit.models.sequence import MTSequence, PhaseTable, PointLike, as_complex

logger = logging.getLogger(__name__)


def reduce_angle(t):
    """Reduce a (−π, π]"""
    return np.pi - np.mod(np.pi - np.asarray(t, dtype=np.float64), 2.0 * np.pi)


# ============= FASE DE MÖBIUS =============

def mobius_factor(w: PointLike, z):
    """Factor (w̄/|w|)(z − w)/(1 − w̄z); z si w = 0"""
    w = as_complex(w)
    z = np.asarray(z, dtype=np.complex128)
    if w == 0:
        return z
    return (np.conj(w) / abs(w)) * (z - w) / (1.0 - np.conj(w) * z)


def mobius_phase(w: PointLike, x):
    """
    Fase Ψ_w(x) = t + 2 arcsin(|w| sin t / sqrt(1 + |w|² − 2|w| cos t)), t = x − arg w en (−π, π]

    El arcoseno se evalúa como 2·arctan2(|w| sin t, 1 − |w| cos t), que es el mismo
    ángulo (su coseno es positivo) y no pierde precisión cerca de |w| → 1.
    Convención: Ψ_0(x) = x.
    """
    w = as_complex(w)
    x = np.asarray(x, dtype=np.float64)
    r = abs(w)
    if r == 0.0:
        return x.copy() if x.ndim else float(x)
    phase = polar_phase(r, np.angle(w), x)
    return phase if phase.ndim else float(phase)


def polar_phase(r: float, angle, x) -> np.ndarray:
    """Ψ_w(x) con w = r e^{i·angle}, vectorizada en angle y x (r > 0)"""
    t = reduce_angle(np.asarray(x, dtype=np.float64) - np.asarray(angle, dtype=np.float64))
    return t + 2.0 * np.arctan2(r * np.sin(t), 1.0 - r * np.cos(t))


def mobius_phase_deriv(w: PointLike, x, order: int = 1):
    """
    Derivadas cerradas de Ψ_w

    order 1: núcleo de Poisson (1 − |w|²)/(1 + |w|² − 2|w| cos t)
    order 2: −2|w|(1 − |w|²) sin t/(1 + |w|² − 2|w| cos t)²
    """
    if order not in (1, 2):
        raise InvalidArgumentError(f"derivative order must be 1 or 2, got {order}")
    w = as_complex(w)
    x = np.asarray(x, dtype=np.float64)
    r = abs(w)
    t = x - np.angle(w)
    denominator = 1.0 + r * r - 2.0 * r * np.cos(t)
    if order == 1:
        out = (1.0 - r * r) / denominator
    else:
        out = -2.0 * r * (1.0 - r * r) * np.sin(t) / denominator ** 2
    return out if np.ndim(out) else float(out)


# ============= FASES ACUMULADAS =============

def build_phase_table(
    seq: MTSequence,
    grid: CircleGrid,
    budget: Optional[int] = None
) -> PhaseTable:
    """
    Tabla ψ_n(θ_j) = Σ_{j ≤ n} Ψ_{a_j}(θ_j) para n = i_min − 1, …, i_max

    La fila de i_min − 1 es cero. Se rechaza si (L + 1)·N excede el presupuesto.
    """
    budget = settings.phase_table_budget if budget is None else budget
    required = (seq.length + 1) * grid.n_points
    if required > budget:
        logger.warning(f"Tabla de fases rechazada: {required} entradas > {budget}")
        raise ResourceGuardError(
            f"phase table needs {required} entries, budget is {budget}",
            required=required,
            limit=budget
        )

    theta = grid.points
    psi = np.zeros((seq.length + 1, grid.n_points))
    for position, w in enumerate(seq.points, start=1):
        psi[position] = psi[position - 1] + mobius_phase(w, theta)

    logger.debug(f"Tabla de fases: {seq.length} índices × {grid.n_points} puntos")
    return PhaseTable(sequence=seq, grid=grid, psi=psi)


def blaschke_eval(seq: MTSequence, n: int, z):
    """
    B_n(z) = Π_{j=i_min}^{n} (ā_j/|a_j|)(z − a_j)/(1 − ā_j z), con B = 1 para n = i_min − 1
    """
    if not seq.i_min - 1 <= n <= seq.i_max:
        raise InvalidArgumentError(
            f"index {n} outside [{seq.i_min - 1}, {seq.i_max}]"
        )
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise InvalidArgumentError("blaschke_eval is defined on the closed disk only")
    result = np.ones_like(z)
    for w in seq.points[: n - seq.i_min + 1]:
        result = result * mobius_factor(w, z)
    return result if result.ndim else complex(result)


# ============= ÍNDICE DE CELDA =============

def cell_width(r: float) -> float:
    if not 0.0 < r < 1.0:
        raise InvalidArgumentError(f"r must lie in (0, 1), got {r}")
    return 2.0 * np.pi * (1.0 - r)


def cell_index(r: float, x):
    """k(x) = floor(x / (2π(1 − r)))"""
    width = cell_width(r)
    k = np.floor(np.asarray(x, dtype=np.float64) / width).astype(np.int64)
    return k if k.ndim else int(k)


# ============= ESTIMACIONES DE FASE =============

def decomposition_ratio(r: float, y):
    """Ψ_r′(y)·(y² + (1 − r)²)/(1 − r); acotado arriba y abajo uniformemente en r"""
    y = np.asarray(y, dtype=np.float64)
    eps = 1.0 - r
    return mobius_phase_deriv(r, y, order=1) * (y * y + eps * eps) / eps


def asymptotic_envelope_ratio(r: float, x, coefficient: float = 2.0):
    """
    |Ψ_r(x) − π + c/(1 + x/(1 − r))| dividido por
    1/(1 + (x/(1 − r))²) + (1 − r)/(1 + x/(1 − r)) + (1 − r)x, para x ∈ (0, 1]

    Con c = 2 el cociente queda acotado uniformemente cuando r → 1, pues
    Ψ_r(x) = π − (1 − r)cot(x/2) + O((1 − r)²); con c = 1 crece como (1 − r)^{−1/2}.
    """
    x = np.asarray(x, dtype=np.float64)
    eps = 1.0 - r
    s = x / eps
    deviation = np.abs(mobius_phase(r, x) - np.pi + coefficient / (1.0 + s))
    envelope = 1.0 / (1.0 + s * s) + eps / (1.0 + s) + eps * x
    return deviation / envelope


# ============= SIMETRÍAS =============

def rotation_residual(r: float, j: int, x) -> float:
    """max |Ψ_{a_j}(x + 2π(1 − r)) − Ψ_{a_{j−1}}(x)| módulo 2π, con a_j = r e^{2πij(1 − r)}"""
    x = np.asarray(x, dtype=np.float64)
    width = cell_width(r)
    current = r * np.exp(1j * width * j)
    previous = r * np.exp(1j * width * (j - 1))
    difference = mobius_phase(current, x + width) - mobius_phase(previous, x)
    return float(np.max(np.abs(reduce_angle(difference))))


def conjugate_reflection_residual(w: PointLike, y) -> float:
    """max |e^{−iΨ_w(−y)} − e^{iΨ_w̄(y)}|"""
    w = as_complex(w)
    y = np.asarray(y, dtype=np.float64)
    left = np.exp(-1j * mobius_phase(w, -y))
    right = np.exp(1j * mobius_phase(np.conj(w), y))
    return float(np.max(np.abs(left - right)))
