"""
Servicio de operadores de Carleson
Transformadas de Hilbert H y H̃, operador de Carleson linealizado, su adjunto, χ_N y la forma cuadrática B
"""
import logging
from functools import lru_cache

import numpy as np
from scipy import integrate

from mtkit.config import settings, constants
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.basis import MTBasis
from mtkit.models.circle import CircleGrid, GridFunction
from mtkit.models.levels import LevelFunction
from mtkit.models.sequence import MTSequence, PhaseTable
from mtkit.services.blaschke import cell_index, mobius_phase_deriv
from mtkit.services.circle import apply_multiplier, hl_maximal
from mtkit.services.mt_system import partial_sum

logger = logging.getLogger(__name__)


# ============= TRANSFORMADAS DE HILBERT =============

def hilbert_multiplier(grid: CircleGrid) -> np.ndarray:
    """−i·sgn(k) en orden FFT"""
    return -1j * np.sign(grid.frequencies)


def hilbert_H(f: GridFunction) -> GridFunction:
    """Función conjugada: f̂(k) ↦ −i·sgn(k)·f̂(k)"""
    return apply_multiplier(f, hilbert_multiplier(f.grid))


@lru_cache(maxsize=32)
def _leibniz_partial_sums(half: int) -> np.ndarray:
    """s_m = Σ_{j=1}^{m} (−1)^{j−1}/(2j − 1), m = 0, …, half"""
    j = np.arange(1, half + 1)
    terms = np.where(j % 2 == 1, 1.0, -1.0) / (2.0 * j - 1.0)
    return np.concatenate([[0.0], np.cumsum(terms)])


def tilde_multiplier(grid: CircleGrid) -> np.ndarray:
    """Multiplicador de H̃: −i·sgn(k)·(4/π)·Σ_{j=1}^{|k|} (−1)^{j−1}/(2j − 1)"""
    freqs = grid.frequencies
    partial = _leibniz_partial_sums(grid.n_points // 2)
    return -1j * np.sign(freqs) * (4.0 / np.pi) * partial[np.abs(freqs)]


@lru_cache(maxsize=8)
def _correction_sine_integrals(n_points: int) -> np.ndarray:
    """I_k = (1/π) ∫_0^π tan(t/4) sin(kt) dt para k = 0, …, N/2"""
    half = n_points // 2
    values = np.zeros(half + 1)
    for k in range(1, half + 1):
        integral, _ = integrate.quad(
            lambda t: np.tan(t / 4.0),
            0.0,
            np.pi,
            weight="sin",
            wvar=float(k),
            epsabs=1e-15,
            epsrel=1e-13,
            limit=200
        )
        values[k] = integral / np.pi
    return values


def correction_kernel_spectrum(grid: CircleGrid) -> np.ndarray:
    """
    Coeficientes de Fourier de κ(t) = 1/sin(t/2) − 1/tan(t/2) = tan(t/4), κ(0) = 0

    κ es impar, así que κ̂(k) = −i·sgn(k)·I_{|k|}.
    """
    freqs = grid.frequencies
    integrals = _correction_sine_integrals(grid.n_points)
    return -1j * np.sign(freqs) * integrals[np.abs(freqs)]


def hilbert_tilde(f: GridFunction, method: str = constants.TILDE_MULTIPLIER) -> GridFunction:
    """
    H̃f(x) = (1/2π) ∫ f(y)/sin((x − y)/2) dy

    multiplier: multiplicador cerrado
    kernel: H más la convolución con tan(t/4) (coeficientes por cuadratura)
    """
    if method == constants.TILDE_MULTIPLIER:
        return apply_multiplier(f, tilde_multiplier(f.grid))
    if method == constants.TILDE_KERNEL:
        multiplier = hilbert_multiplier(f.grid) + correction_kernel_spectrum(f.grid)
        return apply_multiplier(f, multiplier)
    raise InvalidArgumentError(f"unknown H̃ realization {method!r}")


# ============= OPERADOR LINEALIZADO =============

def _check_compatible(f: GridFunction, table: PhaseTable, levels: LevelFunction) -> None:
    if not (f.grid.same_as(table.grid) and f.grid.same_as(levels.grid)):
        raise InvalidArgumentError("function, phase table and level function must share the grid")
    # valida el rango de niveles
    table.row_position(levels.levels)


def linearized_carleson(f: GridFunction, table: PhaseTable, levels: LevelFunction) -> GridFunction:
    """T_N f(x) = Σ_m H̃(f e^{−iψ_m})(x)·1_{A_m}(x), un H̃ por nivel presente"""
    _check_compatible(f, table, levels)
    out = np.zeros(f.n_points, dtype=np.complex128)
    for m in levels.occurring_levels:
        mask = levels.level_set(m)
        modulated = f.with_values(f.values * np.exp(-1j * table.row(int(m))))
        out[mask] = hilbert_tilde(modulated).values[mask]
    return GridFunction(grid=f.grid, values=out)


def linearized_adjoint(g: GridFunction, table: PhaseTable, levels: LevelFunction) -> GridFunction:
    """T_N* g(y) = −Σ_m e^{iψ_m(y)} H̃(g 1_{A_m})(y)"""
    _check_compatible(g, table, levels)
    out = np.zeros(g.n_points, dtype=np.complex128)
    for m in levels.occurring_levels:
        restricted = g.with_values(np.where(levels.level_set(m), g.values, 0.0))
        out -= table.phase(int(m)) * hilbert_tilde(restricted).values
    return GridFunction(grid=g.grid, values=out)


# ============= MODULACIÓN Y FORMA CUADRÁTICA =============

def chi(table: PhaseTable, levels: LevelFunction, x_index: int, z_index: int) -> float:
    """χ_N(x, z) = sgn(N(z) − N(x))·sin((ψ_{N(z)} − ψ_{N(x)})(x))"""
    level_x = int(levels.levels[x_index])
    level_z = int(levels.levels[z_index])
    if level_x == level_z:
        return 0.0
    difference = table.row(level_z)[x_index] - table.row(level_x)[x_index]
    return float(np.sign(level_z - level_x) * np.sin(difference))


def chi_rows(table: PhaseTable, levels: LevelFunction, x_indices: np.ndarray) -> np.ndarray:
    """Bloque χ_N(x, ·) para las filas x_indices; forma (len(x_indices), N)"""
    rows = table.row_position(levels.levels)
    psi_z_at_x = table.psi[rows[None, :], x_indices[:, None]]
    psi_x_at_x = table.psi[rows[x_indices], x_indices][:, None]
    signs = np.sign(levels.levels[None, :] - levels.levels[x_indices][:, None])
    return signs * np.sin(psi_z_at_x - psi_x_at_x)


def _inverse_sine_by_offset(n: int) -> np.ndarray:
    """1/sin(t/2) con t = 2πd/N reducido a (−π, π], y 0 en d = 0"""
    d = np.arange(n)
    d = np.where(d > n // 2, d - n, d)
    out = np.zeros(n)
    nonzero = d != 0
    out[nonzero] = 1.0 / np.sin(np.pi * d[nonzero] / n)
    return out


def _real_values(g: GridFunction) -> np.ndarray:
    if g.is_real:
        return g.values
    if np.any(g.values.imag != 0.0):
        raise InvalidArgumentError("quadratic form B requires a real-valued g")
    return g.values.real


def quadratic_form_B(
    g: GridFunction,
    table: PhaseTable,
    levels: LevelFunction,
    block: int = 256
) -> float:
    """
    B(g, N) = (1/2π)² ∫∫ g(x) g(z) χ_N(x, z)/sin((z − x)/2) dx dz

    Suma doble sobre la malla por bloques de filas; la diagonal no contribuye.
    """
    values = _real_values(g)
    n = g.n_points
    if n > settings.quadratic_form_max_points:
        raise ResourceGuardError(
            f"quadratic form limited to {settings.quadratic_form_max_points} grid points, got {n}",
            required=n,
            limit=settings.quadratic_form_max_points
        )
    _check_compatible(g, table, levels)

    kernel = _inverse_sine_by_offset(n)
    columns = np.arange(n)
    total = 0.0
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        weights = values[rows][:, None] * values[None, :]
        offsets = (columns[None, :] - rows[:, None]) % n
        total += float(np.sum(weights * chi_rows(table, levels, rows) * kernel[offsets]))
    return total / (n * n)


def adjoint_norm_gap(g: GridFunction, table: PhaseTable, levels: LevelFunction) -> dict:
    """‖T_N* g‖², 2B(g, N) y su diferencia relativa a ‖g‖²"""
    adjoint = linearized_adjoint(g, table, levels)
    norm_sq = adjoint.norm() ** 2
    form = quadratic_form_B(g, table, levels)
    g_norm_sq = g.norm() ** 2
    return {
        "adjoint_norm_sq": norm_sq,
        "B": form,
        "g_norm_sq": g_norm_sq,
        "gap_ratio": abs(norm_sq - 2.0 * form) / g_norm_sq if g_norm_sq else 0.0,
        "B_ratio": form / g_norm_sq if g_norm_sq else 0.0
    }


# ============= ESTIMACIONES PUNTUALES =============

def partial_sum_domination_ratio(f: GridFunction, basis: MTBasis, n: int) -> np.ndarray:
    """
    |S_n f| / (|H̃(f e^{−iψ_{n+1}})| + |H f| + M f) punto a punto

    S_n incluye φ_n, así que su núcleo usa la fase ψ_{n+1}.
    """
    partial = np.abs(partial_sum(f, basis, n).values)
    modulated = f.with_values(f.values * np.exp(-1j * basis.table.row(n + 1)))
    bound = (
        np.abs(hilbert_tilde(modulated).values)
        + np.abs(hilbert_H(f).values)
        + hl_maximal(f).values
    )
    return np.divide(partial, bound, out=np.zeros_like(partial), where=bound > 0)


def phase_difference_derivative(seq: MTSequence, m: int, m_prime: int, y) -> np.ndarray:
    """(ψ_{m′} − ψ_m)′(y) = Σ_{j=m+1}^{m′} Ψ′_{a_j}(y)"""
    if not seq.i_min - 1 <= m < m_prime <= seq.i_max:
        raise InvalidArgumentError(f"need {seq.i_min - 1} <= m < m' <= {seq.i_max}")
    y = np.asarray(y, dtype=np.float64)
    total = np.zeros_like(y)
    for j in range(m + 1, m_prime + 1):
        total = total + mobius_phase_deriv(seq.point(j), y, order=1)
    return total


def phase_derivative_envelope_ratio(seq: MTSequence, r: float, m: int, m_prime: int, y) -> np.ndarray:
    """Derivada exacta dividida por 1/((1 − r)(1 + dist(k(y), [m, m′])))"""
    derivative = phase_difference_derivative(seq, m, m_prime, y)
    k = cell_index(r, y)
    distance = np.maximum(0, np.maximum(m - k, k - m_prime))
    envelope = 1.0 / ((1.0 - r) * (1.0 + distance))
    return derivative / envelope
