"""
Servicio del sistema de Malmquist-Takenaka
Generación de sucesiones, base φ_n, coeficientes, sumas parciales y operador maximal
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from mtkit.config import settings, constants
from mtkit.exceptions import InvalidArgumentError
from mtkit.models.basis import MaximalResult, MTBasis, MTExpansion
from mtkit.models.circle import CircleGrid, GridFunction
from mtkit.models.levels import LevelFunction
from mtkit.models.sequence import MTSequence
from mtkit.services.blaschke import build_phase_table
from mtkit.services.circle import hardy_project

logger = logging.getLogger(__name__)


# ============= SUCESIONES =============

def _check_radius(r: Optional[float]) -> float:
    if r is None or not 0.5 < r < 1.0:
        raise InvalidArgumentError(f"r must lie in (1/2, 1), got {r}")
    return float(r)


def a_r_length(r: float) -> int:
    """[1/(1 − r)]"""
    return int(math.floor(1.0 / (1.0 - r) + 1e-9))


def a_r_extension(r: float) -> int:
    """K = [1/(4(1 − r))]"""
    return int(math.floor(1.0 / (4.0 * (1.0 - r)) + 1e-9))


def a_r_point(r: float, n) -> np.ndarray:
    """a_n = r e^{2πin(1 − r)} para cualquier entero n"""
    return r * np.exp(2j * np.pi * np.asarray(n, dtype=np.float64) * (1.0 - r))


def d_r_length(r: float) -> int:
    """[1/((1 − r) log(1/(1 − r)))]"""
    eps = 1.0 - r
    return int(math.floor(1.0 / (eps * math.log(1.0 / eps)) + 1e-9))


def b_point(n: int) -> complex:
    """b_n = (1 − 2^{−[log₂ n]}) e^{2πi n 2^{−[log₂ n]}}"""
    m = int(n).bit_length() - 1
    block = 1 << m
    return (1.0 - 1.0 / block) * np.exp(2j * np.pi * ((n % block) / block))


def make_sequence(
    kind: str,
    r: Optional[float] = None,
    length: Optional[int] = None,
    extended: bool = False,
    upper: Optional[int] = None,
    points: Optional[Sequence[complex]] = None,
    i_min: int = 1
) -> MTSequence:
    """
    Generar una de las sucesiones del sistema

    a_r: a_n = r e^{2πin(1−r)}, 1 ≤ n ≤ [1/(1−r)] (desde −K si extended)
    d_r: d_n = r e^{2πin(1−r)log(1/(1−r))}, 1 ≤ n ≤ [1/((1−r)log(1/(1−r)))]
    b: b_n truncada en length
    custom: puntos dados
    upper recorta el índice final (útil para la sonda, que solo usa −K…K).
    """
    try:
        if kind == constants.KIND_A_R:
            r = _check_radius(r)
            last = a_r_length(r) if upper is None else min(upper, a_r_length(r))
            first = -a_r_extension(r) if extended else 1
            indices = np.arange(first, last + 1)
            params = {"r": r, "K": float(a_r_extension(r)) if extended else 0.0}
            return MTSequence(points=a_r_point(r, indices), i_min=first, kind=kind, params=params)

        if kind == constants.KIND_D_R:
            r = _check_radius(r)
            eps = 1.0 - r
            indices = np.arange(1, d_r_length(r) + 1)
            points = r * np.exp(2j * np.pi * indices * eps * math.log(1.0 / eps))
            return MTSequence(points=points, i_min=1, kind=kind, params={"r": r})

        if kind == constants.KIND_B:
            if length is None or length < 1:
                raise InvalidArgumentError(f"b needs a truncation length >= 1, got {length}")
            points = [b_point(n) for n in range(1, length + 1)]
            return MTSequence(points=points, i_min=1, kind=kind, params={"length": float(length)})

        if kind == constants.KIND_CUSTOM:
            return MTSequence(points=[] if points is None else points, i_min=i_min, kind=kind)
    except ValidationError as exc:
        raise InvalidArgumentError(str(exc)) from exc

    raise InvalidArgumentError(f"unknown sequence kind {kind!r}")


def zero_sequence(length: int) -> MTSequence:
    """a_n ≡ 0: el sistema trigonométrico clásico"""
    return make_sequence(constants.KIND_CUSTOM, points=np.zeros(length))


# ============= BASE =============

def required_grid_size(seq: MTSequence) -> int:
    """Menor potencia de dos N con N ≥ samples_per_pole/(1 − max|a|)"""
    minimum = settings.samples_per_pole / (1.0 - seq.max_modulus)
    return 1 << max(1, math.ceil(math.log2(minimum) - 1e-12))


def check_resolution(seq: MTSequence, grid: CircleGrid, unsafe: bool = False) -> None:
    minimum = settings.samples_per_pole / (1.0 - seq.max_modulus)
    if grid.n_points < minimum and not unsafe:
        raise InvalidArgumentError(
            f"grid of {grid.n_points} points is too coarse for max |a| = {seq.max_modulus:.6g}; "
            f"need N >= {required_grid_size(seq)}"
        )


def build_basis(seq: MTSequence, grid: CircleGrid, unsafe: bool = False) -> MTBasis:
    """
    φ_n(e^{iθ}) = e^{iψ_n(θ)} √(1 − |a_{n+1}|²)/(1 − ā_{n+1}e^{iθ}), n = i_min − 1, …, i_max − 1
    """
    check_resolution(seq, grid, unsafe)
    table = build_phase_table(seq, grid)
    z = np.exp(1j * grid.points)
    a = seq.points[:, None]
    kernels = np.sqrt(1.0 - np.abs(a) ** 2) / (1.0 - np.conj(a) * z[None, :])
    phi = np.exp(1j * table.psi[:-1]) * kernels
    logger.info(f"✓ Base MT construida: {seq.length} funciones, N = {grid.n_points}")
    return MTBasis(table=table, phi=phi)


def gram_matrix(basis: MTBasis) -> np.ndarray:
    """⟨φ_i, φ_j⟩ por cuadratura"""
    return basis.phi @ basis.phi.conj().T / basis.grid.n_points


def orthonormality_deviation(basis: MTBasis) -> float:
    """max_{i,j} |⟨φ_i, φ_j⟩ − δ_ij|"""
    if basis.size == 0:
        return 0.0
    gram = gram_matrix(basis)
    return float(np.max(np.abs(gram - np.eye(basis.size))))


# ============= EXPANSIÓN Y SUMAS PARCIALES =============

def expand(f: GridFunction, basis: MTBasis, n_max: Optional[int] = None) -> MTExpansion:
    """Coeficientes ⟨f, φ_n⟩ para n = first_index, …, n_max"""
    if not f.grid.same_as(basis.grid):
        raise InvalidArgumentError("function and basis live on different grids")
    n_max = basis.last_index if n_max is None else n_max
    count = basis.position(n_max) + 1
    coefficients = np.conj(basis.phi[:count] @ np.conj(f.values)) / basis.grid.n_points
    return MTExpansion(basis=basis, coefficients=coefficients)


def partial_sum(
    f: GridFunction,
    basis: MTBasis,
    n: int,
    method: str = constants.METHOD_COEFFICIENT
) -> GridFunction:
    """
    S_n f = Σ_{j=first}^{n} ⟨f, φ_j⟩ φ_j

    coefficient: suma directa de coeficientes
    kernel: S_n f = P₊f − B_{n+1} P₊(B̄_{n+1} f), con B_{n+1} = e^{iψ_{n+1}} en el círculo
    """
    position = basis.position(n)
    if not f.grid.same_as(basis.grid):
        raise InvalidArgumentError("function and basis live on different grids")

    if method == constants.METHOD_COEFFICIENT:
        expansion = expand(f, basis, n)
        values = expansion.coefficients @ basis.phi[: position + 1]
        return GridFunction(grid=f.grid, values=values)

    if method == constants.METHOD_KERNEL:
        blaschke = basis.table.phase(n + 1)
        inner = hardy_project(f.with_values(np.conj(blaschke) * f.values))
        values = hardy_project(f).values - blaschke * inner.values
        return GridFunction(grid=f.grid, values=values)

    raise InvalidArgumentError(f"method must be one of {constants.PARTIAL_SUM_METHODS}")


def maximal_partial_sum(f: GridFunction, basis: MTBasis) -> MaximalResult:
    """
    T f(x) = sup_n |S_n f(x)| con suma incremental S_n = S_{n−1} + c_n φ_n

    Devuelve también el menor n donde se alcanza el máximo (LevelFunction).
    """
    expansion = expand(f, basis)
    running = np.zeros(basis.grid.n_points, dtype=np.complex128)
    best = np.full(basis.grid.n_points, -np.inf)
    argmax = np.full(basis.grid.n_points, basis.first_index, dtype=np.int64)

    for position, n in enumerate(basis.indices):
        running += expansion.coefficients[position] * basis.phi[position]
        magnitude = np.abs(running)
        improved = magnitude > best
        best[improved] = magnitude[improved]
        argmax[improved] = n

    if basis.size == 0:
        best = np.zeros(basis.grid.n_points)
        upper = basis.first_index
    else:
        upper = basis.last_index

    levels = LevelFunction(grid=basis.grid, levels=argmax, lower=basis.first_index, upper=upper)
    return MaximalResult(values=GridFunction(grid=basis.grid, values=best), levels=levels)


def maximal_ratio(f: GridFunction, basis: MTBasis) -> float:
    """‖T f‖/‖f‖"""
    norm = f.norm()
    if norm == 0.0:
        return 0.0
    return maximal_partial_sum(f, basis).values.norm() / norm


def even_index_sum(basis: MTBasis, start: int = 0, stop: Optional[int] = None) -> GridFunction:
    """Σ_{j=start}^{stop} φ_{2j} (familia adversaria)"""
    last = (basis.last_index // 2) if stop is None else stop
    values = np.zeros(basis.grid.n_points, dtype=np.complex128)
    for j in range(start, last + 1):
        values += basis.phi[basis.position(2 * j)]
    return GridFunction(grid=basis.grid, values=values)
