import numpy as np
import pytest
from pydantic import ValidationError

from mtkit.exceptions import InvalidArgumentError
from mtkit.models.levels import LevelFunction
from mtkit.models.probe import ProbeConfig
from mtkit.services.blaschke import cell_index
from mtkit.services.probe import (
    associated_pairs,
    build_E_and_p,
    claim2_sigma,
    eta,
    eta_injectivity,
    grid_eta_index,
    grid_tau_index,
    ktilde,
    ktilde_from_cell,
    probe_checks,
    probe_grid,
    probe_table,
    random_admissible,
    reflection_phase_residual,
    tau,
    taueta_residuals
)


@pytest.fixture
def cfg():
    return ProbeConfig(r=1.0 - 2.0 ** -8, lam=8)


def test_probe_config_derived_values(cfg):
    assert cfg.K == 64
    assert cfg.level_bound == 2
    assert cfg.cells == 256
    assert np.isclose(cfg.cell_width, 2 * np.pi / 256)
    assert cfg.half_interval == 1.0 / 16


def test_probe_config_validation():
    with pytest.raises(ValidationError):
        ProbeConfig(r=1.0 - 2.0 ** -8, lam=9)
    with pytest.raises(ValidationError):
        ProbeConfig(r=1.0 - 2.0 ** -6, lam=8)
    with pytest.raises(ValidationError):
        ProbeConfig(r=1.0, lam=8)


def test_tau_reflects_inside_the_cell(cfg):
    w = cfg.cell_width
    assert np.isclose(tau(cfg, 0.1 * w), 0.9 * w)
    assert np.isclose(tau(cfg, 3.25 * w), 3.75 * w)
    assert cell_index(cfg.r, tau(cfg, 3.25 * w)) == 3


def test_ktilde_is_even(cfg):
    k = np.arange(-20, 21)
    values = ktilde_from_cell(cfg, k)
    assert np.all(values % 2 == 0)
    assert ktilde_from_cell(cfg, 3) == 24
    assert ktilde(cfg, 3.5 * cfg.cell_width) == 24


def test_eta_shifts_whole_cells(cfg):
    w = cfg.cell_width
    assert np.isclose(eta(cfg, 2.5 * w), 16.5 * w)


def test_taueta_residuals(cfg, rng):
    x = rng.uniform(-np.pi, np.pi, 10_000)
    z = rng.uniform(-np.pi, np.pi, 10_000)
    report = taueta_residuals(cfg, x, z)
    assert report["commute"] < 1e-12
    assert report["involution"] < 1e-12
    assert report["cell"] == 0
    assert report["dilation"] <= (cfg.lam - 1) * cfg.cell_width + 1e-12
    assert report["reflection"] <= 2 * cfg.cell_width + 1e-12
    assert report["reflection"] <= 4 * np.pi * cfg.eps + 1e-12


def test_reflection_phase_identity(cfg, rng):
    j = rng.integers(-cfg.K, cfg.K + 1, size=300)
    x = rng.uniform(-1.0, 1.0, size=300)
    assert reflection_phase_residual(cfg, j, x) < 1e-10


def test_grid_maps(cfg):
    grid = probe_grid(cfg)
    assert grid.n_points == 1024
    tau_idx = grid_tau_index(cfg, grid)
    assert np.array_equal(tau_idx[tau_idx], np.arange(grid.n_points))

    inside = np.abs(grid.symmetric_points) <= 0.3
    eta_idx = grid_eta_index(cfg, grid, mask=inside)
    assert np.array_equal(eta_idx[tau_idx][inside], tau_idx[eta_idx][inside])
    with pytest.raises(InvalidArgumentError):
        grid_eta_index(cfg, grid, mask=np.ones(grid.n_points, dtype=bool))


def test_probe_grid_requires_integer_cells():
    with pytest.raises(InvalidArgumentError):
        probe_grid(ProbeConfig(r=0.999, lam=4))


def test_eta_is_injective_near_origin(cfg):
    report = eta_injectivity(cfg, probe_grid(cfg))
    assert report["points"] > 0
    assert report["collisions"] == 0
    assert report["max_abs_image"] <= 1.0


def test_probe_table_range(cfg):
    table = probe_table(cfg, probe_grid(cfg))
    assert table.first_index == -cfg.K - 1
    assert table.last_index == cfg.K


def test_level_bound_is_enforced(cfg):
    grid = probe_grid(cfg)
    levels = LevelFunction.constant(grid, cfg.level_bound + 1)
    with pytest.raises(InvalidArgumentError):
        build_E_and_p(cfg, levels)


def test_set_E(cfg):
    grid = probe_grid(cfg)
    E, p = build_E_and_p(cfg, LevelFunction.constant(grid, 0))
    k = np.floor_divide(grid.symmetric_indices, cfg.points_per_cell)
    assert np.array_equal(p, -k)
    assert np.all(np.abs(grid.symmetric_points[E]) <= cfg.half_interval)
    assert np.all(k[E] % 2 == 0)
    assert np.all(k[E] <= 0)
    assert E.any()


def test_associated_pairs(cfg, rng):
    grid = probe_grid(cfg)
    g, levels = random_admissible(cfg, grid, rng)
    pairs = associated_pairs(cfg, g, levels)
    assert np.array_equal(pairs.M_tilde.levels, pairs.M_tilde_identity.levels)
    # τ y η preservan la masa de g
    assert np.isclose(pairs.f.norm(), g.norm())
    assert np.isclose(pairs.g_tilde.norm(), g.norm())
    assert np.isclose(pairs.f_tilde.norm(), g.norm())


def test_associated_pairs_require_support_in_E(cfg, rng):
    grid = probe_grid(cfg)
    g, levels = random_admissible(cfg, grid, rng)
    E, _ = build_E_and_p(cfg, levels)
    outside = int(np.flatnonzero(~E)[0])
    values = np.array(g.values)
    values[outside] = 1.0
    with pytest.raises(InvalidArgumentError):
        associated_pairs(cfg, g.with_values(values), levels)


def test_sigma_is_sum_of_terms(cfg, rng):
    grid = probe_grid(cfg)
    g, levels = random_admissible(cfg, grid, rng)
    report = claim2_sigma(cfg, g, levels)
    expected = report.B_g + cfg.lam * report.B_g_tilde + report.B_f + cfg.lam * report.B_f_tilde
    assert np.isclose(report.sigma, expected)
    assert np.isclose(report.g_norm_sq, g.norm() ** 2)
    assert np.isfinite(report.ratio)


def test_probe_checks(rng):
    cfg = ProbeConfig(r=1.0 - 2.0 ** -7, lam=8)
    report = probe_checks(cfg, rng, samples=2000)
    assert report["commute"] < 1e-12
    assert report["involution"] < 1e-12
    assert report["cell"] == 0
    assert report["collisions"] == 0
    assert report["phase_reflection"] < 1e-10
    assert report["dilation"] <= report["dilation_bound"] + 1e-12
    assert report["reflection"] <= report["reflection_bound"] + 1e-12


def test_tau_eta_near_the_circle(rng):
    cfg = ProbeConfig(r=1.0 - 2.0 ** -10, lam=8)
    assert cfg.K == 256
    x = rng.uniform(-np.pi, np.pi, 10_000)
    z = rng.uniform(-np.pi, np.pi, 10_000)
    report = taueta_residuals(cfg, x, z)
    assert report["commute"] < 1e-12
    assert report["involution"] < 1e-12
    assert report["cell"] == 0
    assert report["dilation"] <= (cfg.lam - 1) * cfg.cell_width + 1e-12
    assert report["reflection"] <= 2 * cfg.cell_width + 1e-12

    injectivity = eta_injectivity(cfg, probe_grid(cfg))
    assert injectivity["points"] > 0
    assert injectivity["collisions"] == 0


def test_reflection_phase_identity_on_many_samples(rng):
    cfg = ProbeConfig(r=1.0 - 2.0 ** -10, lam=8)
    j = rng.integers(-cfg.K, cfg.K + 1, size=20_000)
    x = rng.uniform(-1.0, 1.0, size=20_000)
    assert reflection_phase_residual(cfg, j, x) < 1e-9
    assert reflection_phase_residual(cfg, [], []) == 0.0
