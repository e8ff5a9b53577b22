"""
Servicio de la sonda
Reflexión τ, dilatación η, conjunto E, pares asociados y la cantidad combinada Σ
"""
import logging
from typing import Optional, Tuple

import numpy as np

from mtkit.config import constants
from mtkit.exceptions import InvalidArgumentError
from mtkit.models.circle import CircleGrid, GridFunction
from mtkit.models.levels import LevelFunction
from mtkit.models.probe import AssociatedPairs, ProbeConfig, ProbeReport
from mtkit.models.sequence import PhaseTable
from mtkit.services.blaschke import build_phase_table, cell_index, polar_phase, reduce_angle
from mtkit.services.carleson import quadratic_form_B
from mtkit.services.circle import make_grid
from mtkit.services.mt_system import make_sequence

logger = logging.getLogger(__name__)


# ============= τ, k̃ Y η SOBRE LA RECTA =============

def tau(cfg: ProbeConfig, x):
    """τ(x) = 2π(1 − r)(2k(x) + 1) − x"""
    x = np.asarray(x, dtype=np.float64)
    k = cell_index(cfg.r, x)
    out = cfg.cell_width * (2 * k + 1) - x
    return out if np.ndim(out) else float(out)


def ktilde_from_cell(cfg: ProbeConfig, k):
    """[Λk] si es par, [Λk] + 1 si no"""
    value = np.floor(cfg.lam * np.asarray(k, dtype=np.float64)).astype(np.int64)
    value = np.where(value % 2 == 0, value, value + 1)
    return value if value.ndim else int(value)


def ktilde(cfg: ProbeConfig, x):
    return ktilde_from_cell(cfg, cell_index(cfg.r, x))


def eta(cfg: ProbeConfig, x):
    """η(x) = (k̃(x) − k(x))·2π(1 − r) + x"""
    x = np.asarray(x, dtype=np.float64)
    k = cell_index(cfg.r, x)
    out = (ktilde_from_cell(cfg, k) - k) * cfg.cell_width + x
    return out if np.ndim(out) else float(out)


def taueta_residuals(cfg: ProbeConfig, x, z) -> dict:
    """
    Residuos máximos de las propiedades de τ y η sobre muestras x, z

    commute: |τη(x) − ητ(x)|; involution: |ττ(x) − x|; cell: #{k(η(x)) ≠ k̃(x)};
    dilation: |η(x) − η(z) − Λ(x − z)|; reflection: |τ(x) − τ(z) − (x − z)|
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return {
        "commute": float(np.max(np.abs(tau(cfg, eta(cfg, x)) - eta(cfg, tau(cfg, x))))),
        "involution": float(np.max(np.abs(tau(cfg, tau(cfg, x)) - x))),
        "cell": int(np.count_nonzero(cell_index(cfg.r, eta(cfg, x)) != ktilde(cfg, x))),
        "dilation": float(np.max(np.abs(eta(cfg, x) - eta(cfg, z) - cfg.lam * (x - z)))),
        "reflection": float(np.max(np.abs(tau(cfg, x) - tau(cfg, z) - (x - z))))
    }


def reflection_phase_residual(cfg: ProbeConfig, j, x) -> float:
    """max |Ψ_{a_j}(τ(x)) + Ψ_{a_{2k(x)+1−j}}(x)| módulo 2π"""
    j = np.asarray(j, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    k = cell_index(cfg.r, x)
    # arg a_n = n·2π(1 − r)
    left = polar_phase(cfg.r, cfg.cell_width * j, tau(cfg, x))
    right = polar_phase(cfg.r, cfg.cell_width * (2 * k + 1 - j), x)
    return float(np.max(np.abs(reduce_angle(left + right))))


# ============= MALLA CONMENSURABLE =============

def probe_grid(cfg: ProbeConfig) -> CircleGrid:
    """Malla con points_per_cell puntos por celda; requiere 1/(1 − r) entero"""
    if cfg.cells is None:
        raise InvalidArgumentError(f"1/(1 − r) must be an integer for a probe grid, r = {cfg.r}")
    return make_grid(cfg.cells * cfg.points_per_cell)


def _check_probe_grid(cfg: ProbeConfig, grid: CircleGrid) -> None:
    if cfg.cells is None or grid.n_points != cfg.cells * cfg.points_per_cell:
        raise InvalidArgumentError(
            f"grid of {grid.n_points} points is not the probe grid for r = {cfg.r}"
        )


def grid_cells(cfg: ProbeConfig, grid: CircleGrid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(índice simétrico j, celda k(θ_j), desplazamiento dentro de la celda) en aritmética entera"""
    _check_probe_grid(cfg, grid)
    j = grid.symmetric_indices
    k = np.floor_divide(j, cfg.points_per_cell)
    return j, k, j - k * cfg.points_per_cell


def grid_tau_index(cfg: ProbeConfig, grid: CircleGrid) -> np.ndarray:
    """
    τ sobre la malla: el desplazamiento i dentro de la celda va a P − 1 − i

    Es τ(x + h/2) − h/2 con h el paso; involución exacta que conmuta con η.
    """
    _, k, offset = grid_cells(cfg, grid)
    reflected = k * cfg.points_per_cell + (cfg.points_per_cell - 1 - offset)
    return np.mod(reflected, grid.n_points)


def grid_eta_index(cfg: ProbeConfig, grid: CircleGrid, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """η sobre la malla: traslación por (k̃ − k) celdas completas"""
    j, k, _ = grid_cells(cfg, grid)
    shifted = j + (ktilde_from_cell(cfg, k) - k) * cfg.points_per_cell
    if mask is not None:
        half = grid.n_points // 2
        outside = mask & ((shifted <= -half) | (shifted > half))
        if np.any(outside):
            bad = int(np.flatnonzero(outside)[0])
            raise InvalidArgumentError(f"η sends grid index {bad} past ±π")
    return np.mod(shifted, grid.n_points)


def eta_injectivity(cfg: ProbeConfig, grid: CircleGrid) -> dict:
    """Colisiones de η en los puntos de [−1/(2Λ), 1/(2Λ)] y máximo |η(x)|"""
    inside = np.abs(grid.symmetric_points) <= cfg.half_interval
    j, k, _ = grid_cells(cfg, grid)
    images = (j + (ktilde_from_cell(cfg, k) - k) * cfg.points_per_cell)[inside]
    return {
        "points": int(inside.sum()),
        "collisions": int(images.size - np.unique(images).size),
        "max_abs_image": float(np.max(np.abs(images)) * grid.step) if images.size else 0.0
    }


# ============= CONJUNTO E Y PARES ASOCIADOS =============

def probe_table(cfg: ProbeConfig, grid: CircleGrid) -> PhaseTable:
    """ψ_m para −K − 1 ≤ m ≤ K con la sucesión a_r extendida"""
    seq = make_sequence(constants.KIND_A_R, r=cfg.r, extended=True, upper=cfg.K)
    return build_phase_table(seq, grid)


def build_E_and_p(cfg: ProbeConfig, levels: LevelFunction) -> Tuple[np.ndarray, np.ndarray]:
    """
    p(x) = N(x) − k(x) y E = {|x| ≤ 1/(2Λ) : k(x) par y p(x) ≥ 0}
    """
    bound = cfg.level_bound
    if levels.levels.min() < -bound or levels.levels.max() > bound:
        bad = int(np.flatnonzero(np.abs(levels.levels) > bound)[0])
        raise InvalidArgumentError(
            f"level {int(levels.levels[bad])} at grid index {bad} exceeds the bound {bound}"
        )
    _, k, _ = grid_cells(cfg, levels.grid)
    p = levels.levels - k
    inside = np.abs(levels.grid.symmetric_points) <= cfg.half_interval
    E = inside & (k % 2 == 0) & (p >= 0)
    return E, p


def _bounded_levels(cfg: ProbeConfig, grid: CircleGrid, values: np.ndarray, name: str) -> LevelFunction:
    outside = np.abs(values) > cfg.K
    if np.any(outside):
        bad = int(np.flatnonzero(outside)[0])
        raise InvalidArgumentError(
            f"{name} takes level {int(values[bad])} at grid index {bad}, outside [−{cfg.K}, {cfg.K}]"
        )
    return LevelFunction(grid=grid, levels=values, lower=-cfg.K, upper=cfg.K)


def associated_pairs(cfg: ProbeConfig, g: GridFunction, levels: LevelFunction) -> AssociatedPairs:
    """
    Construir (f, M), (g̃, Ñ), (f̃, M̃) a partir de (g, N)

    f(x) = g(τx)1_E(τx), M(x) = (k(x) + 1 − p(τx))1_E(τx)
    Ñ(ηx) = k̃(x) + p(x), g̃(ηx) = g(x) para x ∈ E
    M̃(ηx′) = k̃(x′) + M(x′) − k(x′), f̃(ηx′) = f(x′) para x′ ∈ τ(E)
    """
    grid = g.grid
    if not grid.same_as(levels.grid):
        raise InvalidArgumentError("g and N must share the grid")
    E, p = build_E_and_p(cfg, levels)
    values = g.values
    if np.any(values[~E] != 0):
        bad = int(np.flatnonzero((values != 0) & ~E)[0])
        raise InvalidArgumentError(f"g must vanish outside E; grid index {bad} violates it")

    _, k, _ = grid_cells(cfg, grid)
    kt = ktilde_from_cell(cfg, k)
    tau_idx = grid_tau_index(cfg, grid)
    n = grid.n_points
    zero = np.zeros(n, dtype=values.dtype)

    # (f, M)
    tau_E = E[tau_idx]
    f = np.where(tau_E, values[tau_idx], zero)
    M = np.where(tau_E, k + 1 - p[tau_idx], 0)

    # (g̃, Ñ)
    eta_idx = grid_eta_index(cfg, grid, mask=E | tau_E)
    g_tilde = zero.copy()
    N_tilde = np.zeros(n, dtype=np.int64)
    g_tilde[eta_idx[E]] = values[E]
    N_tilde[eta_idx[E]] = kt[E] + p[E]

    # (f̃, M̃)
    f_tilde = zero.copy()
    M_tilde = np.zeros(n, dtype=np.int64)
    eta_tau_E = np.zeros(n, dtype=bool)
    f_tilde[eta_idx[tau_E]] = f[tau_E]
    M_tilde[eta_idx[tau_E]] = kt[tau_E] + M[tau_E] - k[tau_E]
    eta_tau_E[eta_idx[tau_E]] = True

    # identidad M̃(y) = (k(y) + 1 − p_Ñ(τy))1_{ητE}(y)
    p_N_tilde = N_tilde - k
    M_tilde_identity = np.where(eta_tau_E, k + 1 - p_N_tilde[tau_idx], 0)

    return AssociatedPairs(
        E=E,
        p=p,
        f=g.with_values(f),
        M=_bounded_levels(cfg, grid, M, "M"),
        g_tilde=g.with_values(g_tilde),
        N_tilde=_bounded_levels(cfg, grid, N_tilde, "Ñ"),
        f_tilde=g.with_values(f_tilde),
        M_tilde=_bounded_levels(cfg, grid, M_tilde, "M̃"),
        M_tilde_identity=_bounded_levels(cfg, grid, M_tilde_identity, "M̃")
    )


def claim2_sigma(
    cfg: ProbeConfig,
    g: GridFunction,
    levels: LevelFunction,
    table: Optional[PhaseTable] = None
) -> ProbeReport:
    """Σ = B(g, N) + Λ B(g̃, Ñ) + B(f, M) + Λ B(f̃, M̃)"""
    pairs = associated_pairs(cfg, g, levels)
    table = probe_table(cfg, g.grid) if table is None else table
    lifted = LevelFunction(grid=g.grid, levels=levels.levels, lower=-cfg.K, upper=cfg.K)

    b_g = quadratic_form_B(g, table, lifted)
    b_g_tilde = quadratic_form_B(pairs.g_tilde, table, pairs.N_tilde)
    b_f = quadratic_form_B(pairs.f, table, pairs.M)
    b_f_tilde = quadratic_form_B(pairs.f_tilde, table, pairs.M_tilde)
    sigma = b_g + cfg.lam * b_g_tilde + b_f + cfg.lam * b_f_tilde
    return ProbeReport(
        sigma=sigma,
        B_g=b_g,
        B_g_tilde=b_g_tilde,
        B_f=b_f,
        B_f_tilde=b_f_tilde,
        g_norm_sq=g.norm() ** 2
    )


def random_admissible(
    cfg: ProbeConfig,
    grid: CircleGrid,
    rng: np.random.Generator,
    attempts: int = 20
) -> Tuple[GridFunction, LevelFunction]:
    """
    (g, N) aleatorio admisible: N constante por celda en [−cota, cota], g gaussiana sobre E
    """
    _, k, _ = grid_cells(cfg, grid)
    bound = cfg.level_bound
    cell_ids, inverse = np.unique(k, return_inverse=True)
    for _ in range(attempts):
        per_cell = rng.integers(-bound, bound + 1, size=cell_ids.size)
        levels = LevelFunction(grid=grid, levels=per_cell[inverse], lower=-bound, upper=bound)
        E, _ = build_E_and_p(cfg, levels)
        if E.any():
            g = np.where(E, rng.standard_normal(grid.n_points), 0.0)
            return GridFunction(grid=grid, values=g), levels
    raise InvalidArgumentError(f"no admissible level function found in {attempts} attempts")


def probe_checks(cfg: ProbeConfig, rng: np.random.Generator, samples: int = 10_000) -> dict:
    """Propiedades de τ/η sobre muestras, inyectividad de η en la malla y reflexión de fases"""
    x = rng.uniform(-np.pi, np.pi, samples)
    z = rng.uniform(-np.pi, np.pi, samples)
    report = taueta_residuals(cfg, x, z)
    report.update(eta_injectivity(cfg, probe_grid(cfg)))
    j = rng.integers(-cfg.K, cfg.K + 1, size=200)
    xs = rng.uniform(-1.0, 1.0, size=200)
    report["phase_reflection"] = reflection_phase_residual(cfg, j, xs)
    # |η(x) − η(z) − Λ(x − z)| < (Λ − 1)·2π(1 − r); |τ(x) − τ(z) − (x − z)| < 2·2π(1 − r)
    report["dilation_bound"] = (cfg.lam - 1) * cfg.cell_width
    report["reflection_bound"] = 2.0 * cfg.cell_width
    return report
