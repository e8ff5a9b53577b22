"""
Servicio de experimentos
Barridos deterministas: planitud para a_r, crecimiento para d_r, bloques lacunares,
sucesión b, identidad TT*, caso modelo y sonda Σ
"""
import logging
import math
from typing import Callable, Dict, List

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from mtkit.config import settings, constants
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.experiment import ExperimentConfig, ExperimentResult
from mtkit.models.levels import LevelFunction
from mtkit.models.probe import ProbeConfig
from mtkit.services.blaschke import build_phase_table, mobius_phase, mobius_phase_deriv, reduce_angle
from mtkit.services.carleson import adjoint_norm_gap
from mtkit.services.circle import make_grid, random_band_limited, synthesize, trigonometric
from mtkit.services.model_case import dilation_deviation, random_sparse
from mtkit.services.mt_system import (
    build_basis,
    even_index_sum,
    make_sequence,
    maximal_ratio,
    required_grid_size,
    zero_sequence
)
from mtkit.services.probe import claim2_sigma, probe_checks, probe_grid, probe_table, random_admissible

logger = logging.getLogger(__name__)


# ============= UTILIDADES =============

def task_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    """Un flujo independiente por tarea: el resultado no depende del orden de ejecución"""
    return np.random.SeedSequence(seed).spawn(count)


def _guard_k(cfg: ExperimentConfig) -> None:
    if cfg.k_max > settings.max_k:
        logger.warning(f"k_max = {cfg.k_max} rechazado (máximo {settings.max_k})")
        raise ResourceGuardError(
            f"k_max {cfg.k_max} exceeds the feasibility guard {settings.max_k}",
            required=cfg.k_max,
            limit=settings.max_k
        )


def _radius(k: int) -> float:
    return 1.0 - 2.0 ** (-k)


def _band(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    return float(values.max() / values.min()) if values.size and values.min() > 0 else math.nan


def _run_parallel(function: Callable, arguments: List[tuple], n_jobs: int) -> List[dict]:
    """joblib en orden de tareas; n_jobs = 1 corre en el proceso actual"""
    return Parallel(n_jobs=n_jobs)(delayed(function)(*args) for args in arguments)


# ============= PLANITUD PARA a_r =============

def _thm1_row(k: int, grid_size: int, trials: int, seed: np.random.SeedSequence, unsafe: bool) -> dict:
    r = _radius(k)
    seq = make_sequence(constants.KIND_A_R, r=r)
    grid = make_grid(max(grid_size, required_grid_size(seq)))
    basis = build_basis(seq, grid, unsafe=unsafe)
    rng = np.random.default_rng(seed)

    random_ratio = 0.0
    for _ in range(trials):
        f = random_band_limited(grid, rng, bandwidth=seq.length, kind="analytic")
        random_ratio = max(random_ratio, maximal_ratio(f, basis))
    adversary_ratio = maximal_ratio(even_index_sum(basis), basis)
    phi0_ratio = maximal_ratio(basis.function(basis.first_index), basis)
    return {
        "sequence": constants.KIND_A_R,
        "k": k,
        "r": r,
        "L": seq.length,
        "grid": grid.n_points,
        "ratio_random": random_ratio,
        "ratio_adversary": adversary_ratio,
        "ratio_phi0": phi0_ratio,
        "ratio": max(random_ratio, adversary_ratio, phi0_ratio)
    }


def _dirichlet_row(k: int, grid_size: int) -> dict:
    """Fila de control: a ≡ 0 y núcleo de Dirichlet Σ_{j<L} e^{ijθ}"""
    length = 2 ** k
    seq = zero_sequence(length)
    grid = make_grid(max(grid_size, 4 * length))
    basis = build_basis(seq, grid)
    f = trigonometric(grid, {j: 1.0 for j in range(length)})
    ratio = maximal_ratio(f, basis)
    return {
        "sequence": "zero",
        "k": k,
        "r": 0.0,
        "L": length,
        "grid": grid.n_points,
        "ratio_random": math.nan,
        "ratio_adversary": ratio,
        "ratio_phi0": math.nan,
        "ratio": ratio
    }


def run_thm1(cfg: ExperimentConfig) -> ExperimentResult:
    """
    ρ(k) = máx sobre pruebas de ‖T f‖/‖f‖ para a_r, r = 1 − 2^{−k}

    Pruebas: polinomios analíticos aleatorios, la familia Σ φ_{2j} y φ_0.
    """
    _guard_k(cfg)
    logger.info(f"Experimento thm1: k = {cfg.k_min}…{cfg.k_max}, {cfg.trials} pruebas")
    seeds = task_seeds(cfg.seed, len(cfg.k_values))
    rows = _run_parallel(
        _thm1_row,
        [(k, cfg.grid, cfg.trials, seed, cfg.unsafe) for k, seed in zip(cfg.k_values, seeds)],
        cfg.n_jobs
    )
    rows.append(_dirichlet_row(cfg.k_max, cfg.grid))
    frame = pd.DataFrame(rows)

    ratios = frame.loc[frame["sequence"] == constants.KIND_A_R, "ratio"]
    summary = {
        "rho_max": float(ratios.max()),
        "rho_min": float(ratios.min()),
        "band": _band(ratios),
        "dirichlet_ratio": float(frame["ratio"].iloc[-1])
    }
    logger.info(f"✓ thm1: banda {summary['band']:.4g}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= CONTRAEJEMPLO PARA d_r =============

def counterexample_M(r: float) -> int:
    """M = [1/(2(1 − r)log(1/(1 − r)))]"""
    eps = 1.0 - r
    return int(math.floor(1.0 / (2.0 * eps * math.log(1.0 / eps)) + 1e-9))


def _interval_minimum(theta: np.ndarray, values: np.ndarray, lo: float, hi: float) -> float:
    """Mínimo de values sobre los puntos con θ ∈ [lo, hi] módulo 2π"""
    mask = np.mod(theta - lo, 2.0 * np.pi) <= hi - lo
    return float(values[mask].min()) if mask.any() else math.inf


def _counterexample_row(k: int, grid_size: int, unsafe: bool) -> dict:
    r = _radius(k)
    eps = 1.0 - r
    seq = make_sequence(constants.KIND_D_R, r=r)
    grid = make_grid(max(grid_size, 64 * 2 ** k))
    basis = build_basis(seq, grid, unsafe=unsafe)
    theta = grid.points

    M = counterexample_M(r)
    M_used = min(M, (seq.length - 1) // 2)
    f = even_index_sum(basis, start=1, stop=M_used)
    ratio = maximal_ratio(f, basis)

    units = {"literal": 1.0 / (2.0 * M), "spacing": 2.0 * np.pi * eps * math.log(1.0 / eps)}
    minima = {f"min_{sum_from}_{unit}": math.inf for sum_from in ("claim", "f") for unit in units}
    running = {"claim": np.zeros(grid.n_points, dtype=np.complex128), "f": np.zeros(grid.n_points, dtype=np.complex128)}
    scale = math.sqrt(eps)

    for n in range(0, M_used + 1):
        phi = basis.phi[basis.position(2 * n)]
        running["claim"] += phi
        if n >= 1:
            running["f"] += phi
        for sum_from, partial in running.items():
            if sum_from == "f" and n == 0:
                continue
            imag = scale * partial.imag
            for unit_name, unit in units.items():
                value = _interval_minimum(theta, imag, (2 * n + 2) * unit, (2 * n + 3) * unit)
                key = f"min_{sum_from}_{unit_name}"
                minima[key] = min(minima[key], value)

    return {
        "k": k,
        "r": r,
        "L": seq.length,
        "M": M,
        "M_used": M_used,
        "grid": grid.n_points,
        "ratio": ratio,
        "ratio_sq": ratio ** 2,
        **minima
    }


def run_counterexample(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Para d_r: ‖T f‖/‖f‖ con f = Σ_{j=1}^{M} φ_{2j} y los mínimos √(1 − r)·Im Σ φ_{2j}
    sobre [(2n+2)u, (2n+3)u], con la suma desde j = 0 y desde j = 1, y u = 1/(2M) o el
    espaciado angular 2π(1 − r)log(1/(1 − r))
    """
    _guard_k(cfg)
    logger.info(f"Experimento counterexample: k = {cfg.k_min}…{cfg.k_max}")
    rows = _run_parallel(
        _counterexample_row,
        [(k, cfg.grid, cfg.unsafe) for k in cfg.k_values],
        cfg.n_jobs
    )
    frame = pd.DataFrame(rows)

    summary = {
        "ratio_sq_max": float(frame["ratio_sq"].max()),
        "increasing": float(bool(np.all(np.diff(frame["ratio_sq"].to_numpy()) > 0))),
    }
    if len(frame) >= 2:
        fit = stats.linregress(frame["k"].to_numpy() * math.log(2.0), frame["ratio_sq"].to_numpy())
        summary["slope"] = float(fit.slope)
    for column in ("min_claim_literal", "min_claim_spacing", "min_f_literal", "min_f_spacing"):
        summary[f"{column}_band"] = _band(frame[column])
    logger.info(f"✓ counterexample: pendiente {summary.get('slope', math.nan):.4g}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= BLOQUES LACUNARES =============

def _block_points(m: int) -> np.ndarray:
    """b_j para j ∈ [2^m, 2^{m+1}): módulo 1 − 2^{−m}, ángulos equiespaciados"""
    n = 2 ** m
    return (1.0 - 2.0 ** (-m)) * np.exp(2j * np.pi * np.arange(n) / n)


def _block_sum(points: np.ndarray, function: Callable, y: np.ndarray) -> np.ndarray:
    total = np.zeros_like(y)
    for w in points:
        total = total + function(w, y)
    return total


def poisson(rho: float, t):
    """(1 − ρ²)/(1 − 2ρ cos t + ρ²)"""
    return (1.0 - rho * rho) / (1.0 - 2.0 * rho * np.cos(t) + rho * rho)


def poisson_deriv(rho: float, t):
    return -2.0 * rho * (1.0 - rho * rho) * np.sin(t) / (1.0 - 2.0 * rho * np.cos(t) + rho * rho) ** 2


def block_closed_forms(m: int) -> dict:
    """
    Σ_j Ψ′_{b_j}(y) = n P_ρ(ny) y Σ_j Ψ″_{b_j}(y) = n² P′_ρ(ny), con n = 2^m y ρ = r_m^n

    D_m = n(1 + ρ)/(1 − ρ) es el valor en y = 0.
    """
    n = 2 ** m
    rho = (1.0 - 2.0 ** (-m)) ** n
    dense = np.linspace(0.0, np.pi, 2 ** 16 + 1)
    return {
        "n": n,
        "rho": rho,
        "D": n * (1.0 + rho) / (1.0 - rho),
        "psi2_sup": float(n * n * np.max(np.abs(poisson_deriv(rho, dense))))
    }


def _lacunary_row(m: int, samples: int) -> dict:
    closed = block_closed_forms(m)
    n, rho = closed["n"], closed["rho"]
    points = _block_points(m)
    y = (2.0 * np.pi / n) * np.arange(samples) / samples

    first = _block_sum(points, lambda w, x: mobius_phase_deriv(w, x, order=1), y)
    second = _block_sum(points, lambda w, x: mobius_phase_deriv(w, x, order=2), y)
    first_closed = n * poisson(rho, n * y)
    second_closed = n * n * poisson_deriv(rho, n * y)

    h = 1e-4 / n
    finite_difference = _block_sum(
        points,
        lambda w, x: reduce_angle(mobius_phase(w, x + h) - mobius_phase(w, x - h)),
        y
    ) / (2.0 * h)

    D_direct = float(_block_sum(points, lambda w, x: mobius_phase_deriv(w, x, order=1), np.zeros(1))[0])
    D_next = block_closed_forms(m + 1)["D"]
    sup_first = float(np.max(np.abs(first_closed)))
    return {
        "m": m,
        "n": n,
        "r_m": 1.0 - 2.0 ** (-m),
        "rho": rho,
        "D_m_direct": D_direct,
        "D_m": closed["D"],
        "D_minus_n": closed["D"] - n,
        "D_over_n": closed["D"] / n,
        "lacunarity": D_next / closed["D"],
        "closed_rel_error": float(np.max(np.abs(first - first_closed)) / sup_first),
        "fd_rel_error": float(np.max(np.abs(finite_difference - first_closed)) / sup_first),
        "psi2_max": float(np.max(np.abs(second))),
        "psi2_closed_max": float(np.max(np.abs(second_closed))),
        "psi2_sup": closed["psi2_sup"]
    }


def run_lacunary(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Bloque m de la sucesión b: 2^m puntos de módulo 1 − 2^{−m}

    Suma directa de Ψ′ y Ψ″ sobre un período [0, 2π/2^m) con cfg.grid muestras,
    formas cerradas y diferencias centradas.
    """
    m_max = 14 if cfg.m_max is None else cfg.m_max
    if m_max > settings.max_lacunary_m:
        raise ResourceGuardError(
            f"m_max {m_max} exceeds the lacunary guard {settings.max_lacunary_m}",
            required=m_max,
            limit=settings.max_lacunary_m
        )
    logger.info(f"Experimento lacunary: m = 1…{m_max}")
    rows = _run_parallel(_lacunary_row, [(m, cfg.grid) for m in range(1, m_max + 1)], cfg.n_jobs)
    frame = pd.DataFrame(rows)

    m = frame["m"].to_numpy()
    summary = {
        "C_D": float(np.max(np.abs(frame["D_minus_n"].to_numpy()) / m)),
        "C_psi2": float(np.max(frame["psi2_max"].to_numpy() / m)),
        "D_over_n_last": float(frame["D_over_n"].iloc[-1]),
        "coth_half": 1.0 / math.tanh(0.5),
        "fd_rel_error_max": float(frame["fd_rel_error"].max())
    }
    logger.info(f"✓ lacunary: D_m/2^m → {summary['D_over_n_last']:.6g}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= SUCESIÓN b =============

def _corollary_row(m: int, grid_size: int, trials: int, seed: np.random.SeedSequence, unsafe: bool) -> dict:
    length = 2 ** m
    seq = make_sequence(constants.KIND_B, length=length)
    grid = make_grid(max(grid_size, required_grid_size(seq)))
    basis = build_basis(seq, grid, unsafe=unsafe)
    rng = np.random.default_rng(seed)

    random_ratio = 0.0
    for _ in range(trials):
        f = random_band_limited(grid, rng, bandwidth=length, kind="analytic")
        random_ratio = max(random_ratio, maximal_ratio(f, basis))
    adversary_ratio = maximal_ratio(even_index_sum(basis), basis)
    phi0_ratio = maximal_ratio(basis.function(basis.first_index), basis)
    return {
        "m": m,
        "length": length,
        "grid": grid.n_points,
        "ratio_random": random_ratio,
        "ratio_adversary": adversary_ratio,
        "ratio_phi0": phi0_ratio,
        "ratio": max(random_ratio, adversary_ratio, phi0_ratio)
    }


def run_corollary_b(cfg: ExperimentConfig) -> ExperimentResult:
    """Razón maximal para b truncada en 2^m puntos, m = 1…m_max"""
    m_max = settings.max_corollary_m if cfg.m_max is None else cfg.m_max
    if m_max > settings.max_corollary_m:
        raise ResourceGuardError(
            f"m_max {m_max} exceeds the corollary guard {settings.max_corollary_m}",
            required=m_max,
            limit=settings.max_corollary_m
        )
    logger.info(f"Experimento corollary-b: m = 1…{m_max}")
    depths = list(range(1, m_max + 1))
    seeds = task_seeds(cfg.seed, len(depths))
    rows = _run_parallel(
        _corollary_row,
        [(m, cfg.grid, cfg.trials, seed, cfg.unsafe) for m, seed in zip(depths, seeds)],
        cfg.n_jobs
    )
    frame = pd.DataFrame(rows)
    summary = {
        "rho_max": float(frame["ratio"].max()),
        "rho_min": float(frame["ratio"].min()),
        "band": _band(frame["ratio"])
    }
    logger.info(f"✓ corollary-b: banda {summary['band']:.4g}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= IDENTIDAD TT* =============

TTSTAR_BANDWIDTH = 64
TTSTAR_ARCS = 8


def ttstar_inputs(rng: np.random.Generator, level_range: tuple) -> tuple:
    """Coeficientes de g (|k| ≤ 64) y un nivel por cada uno de los 8 arcos"""
    ks = np.arange(-TTSTAR_BANDWIDTH, TTSTAR_BANDWIDTH + 1)
    coefficients = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
    arc_levels = rng.integers(level_range[0], level_range[1] + 1, size=TTSTAR_ARCS)
    return ks, coefficients, arc_levels


def ttstar_trial(grid, table, ks, coefficients, arc_levels) -> dict:
    """La misma g y la misma N continuas muestreadas en la malla dada"""
    g = synthesize(grid, ks, coefficients, real=True)
    arcs = np.arange(grid.n_points) * TTSTAR_ARCS // grid.n_points
    levels = LevelFunction(
        grid=grid,
        levels=arc_levels[arcs],
        lower=table.first_index,
        upper=table.last_index
    )
    return adjoint_norm_gap(g, table, levels)


def _ttstar_grid_rows(grid_size: int, k: int, trials: int, seed: int) -> List[dict]:
    r = _radius(k)
    seq = make_sequence(constants.KIND_A_R, r=r)
    grid = make_grid(grid_size)
    table = build_phase_table(seq, grid)
    rows = []
    for trial, trial_seed in enumerate(task_seeds(seed, trials)):
        rng = np.random.default_rng(trial_seed)
        ks, coefficients, arc_levels = ttstar_inputs(rng, (table.first_index, table.last_index))
        report = ttstar_trial(grid, table, ks, coefficients, arc_levels)
        rows.append({"trial": trial, "grid": grid_size, "k": k, **report})
    return rows


def run_ttstar(cfg: ExperimentConfig) -> ExperimentResult:
    """
    |‖T_N*g‖² − 2B(g, N)|/‖g‖² y B(g, N)/‖g‖² en las mallas cfg.grid y 2·cfg.grid

    r = 1 − 2^{−k_min}; cada prueba usa la misma función continua en ambas mallas.
    """
    _guard_k(cfg)
    grids = [cfg.grid, 2 * cfg.grid]
    if grids[1] > settings.quadratic_form_max_points:
        raise ResourceGuardError(
            f"TT* run needs a {grids[1]}-point quadratic form",
            required=grids[1],
            limit=settings.quadratic_form_max_points
        )
    if 2 * TTSTAR_BANDWIDTH >= cfg.grid // 2:
        raise InvalidArgumentError(f"TT* run needs grid > {4 * TTSTAR_BANDWIDTH}")
    logger.info(f"Experimento ttstar: {cfg.trials} pruebas en mallas {grids}")
    parts = _run_parallel(
        _ttstar_grid_rows,
        [(size, cfg.k_min, cfg.trials, cfg.seed) for size in grids],
        cfg.n_jobs
    )
    frame = pd.DataFrame([row for part in parts for row in part])

    summary = {}
    constants_by_grid = []
    for size in grids:
        gap = float(frame.loc[frame["grid"] == size, "gap_ratio"].max()) if cfg.trials else math.nan
        summary[f"C_{size}"] = gap
        constants_by_grid.append(gap)
    summary["C_stability"] = _band(constants_by_grid)
    summary["C_prime"] = float(max(0.0, -frame["B_ratio"].min())) if cfg.trials else math.nan
    logger.info(f"✓ ttstar: C = {constants_by_grid}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= CASO MODELO =============

MODEL_GAPS = [1, 2, 4, 8, 16, 32]


def _model_rows(min_gap: int, size: int, trials: int, seed: np.random.SeedSequence) -> List[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        alpha = random_sparse(rng, size, min_gap)
        rows.append({
            "min_gap": min_gap,
            "trial": trial,
            "size": size,
            **dilation_deviation(alpha, constants.LITERAL_DILATION)
        })
    return rows


def run_model_case(cfg: ExperimentConfig) -> ExperimentResult:
    """Desviación relativa de T(β) respecto de −T(α)/e^{2π²} según el hueco mínimo del soporte"""
    logger.info(f"Experimento model: huecos {MODEL_GAPS}, soporte {cfg.support_size}")
    seeds = task_seeds(cfg.seed, len(MODEL_GAPS))
    trials = max(cfg.trials, 1)
    parts = _run_parallel(
        _model_rows,
        [(gap, cfg.support_size, trials, seed) for gap, seed in zip(MODEL_GAPS, seeds)],
        cfg.n_jobs
    )
    frame = pd.DataFrame([row for part in parts for row in part])
    wide = frame["min_gap"] >= 16
    summary = {
        "deviation_max": float(frame["deviation"].max()),
        "deviation_max_gap16": float(frame.loc[wide, "deviation"].max())
    }
    logger.info(f"✓ model: desviación máxima {summary['deviation_max']:.3g}")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


# ============= SONDA Σ =============

def _probe_rows(k: int, lam: int, trials: int, seed: np.random.SeedSequence) -> tuple:
    cfg = ProbeConfig(r=_radius(k), lam=lam)
    grid = probe_grid(cfg)
    table = probe_table(cfg, grid)
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        g, levels = random_admissible(cfg, grid, rng)
        report = claim2_sigma(cfg, g, levels, table)
        rows.append({
            "trial": trial,
            "r": cfg.r,
            "lambda": lam,
            "sigma": report.sigma,
            "g_norm_sq": report.g_norm_sq,
            "ratio": report.ratio
        })
    return rows, probe_checks(cfg, rng)


def run_probe(cfg: ExperimentConfig) -> ExperimentResult:
    """Σ/‖g‖² sobre pares admisibles aleatorios y comprobaciones de τ/η, r = 1 − 2^{−k}"""
    _guard_k(cfg)
    logger.info(f"Experimento probe: k = {cfg.k_min}…{cfg.k_max}, Λ = {cfg.lam}")
    seeds = task_seeds(cfg.seed, len(cfg.k_values))
    parts = _run_parallel(
        _probe_rows,
        [(k, cfg.lam, cfg.trials, seed) for k, seed in zip(cfg.k_values, seeds)],
        cfg.n_jobs
    )
    frame = pd.DataFrame([row for rows, _ in parts for row in rows], columns=constants.PROBE_COLUMNS)

    summary: Dict[str, float] = {}
    for k, (rows, checks) in zip(cfg.k_values, parts):
        ratios = [row["ratio"] for row in rows]
        summary[f"ratio_max_k{k}"] = float(max(ratios)) if ratios else math.nan
        summary[f"commute_k{k}"] = checks["commute"]
        summary[f"collisions_k{k}"] = float(checks["collisions"])
        summary[f"phase_reflection_k{k}"] = checks["phase_reflection"]
    logger.info(f"✓ probe: {len(frame)} pruebas")
    return ExperimentResult(name=cfg.name, frame=frame, summary=summary)


RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    constants.EXP_THM1: run_thm1,
    constants.EXP_COUNTEREXAMPLE: run_counterexample,
    constants.EXP_LACUNARY: run_lacunary,
    constants.EXP_COROLLARY_B: run_corollary_b,
    constants.EXP_TTSTAR: run_ttstar,
    constants.EXP_MODEL: run_model_case,
    constants.EXP_PROBE: run_probe
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.name](cfg)
