import numpy as np
import pytest

from mtkit.config import constants
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.sequence import DiskPoint
from mtkit.services.blaschke import (
    asymptotic_envelope_ratio,
    blaschke_eval,
    build_phase_table,
    cell_index,
    conjugate_reflection_residual,
    decomposition_ratio,
    mobius_factor,
    mobius_phase,
    mobius_phase_deriv,
    polar_phase,
    reduce_angle,
    rotation_residual
)
from mtkit.services.circle import make_grid
from mtkit.services.mt_system import make_sequence


W = 0.9 * np.exp(0.3j)


def test_phase_of_origin_is_identity():
    x = np.linspace(-np.pi, np.pi, 11)
    assert np.allclose(mobius_phase(0, x), x)


def test_phase_is_argument_of_mobius_factor():
    x = np.linspace(-np.pi, np.pi, 257)
    factor = mobius_factor(W, np.exp(1j * x))
    assert np.allclose(np.abs(factor), 1.0)
    assert np.allclose(np.exp(1j * mobius_phase(W, x)), factor)


def test_phase_accepts_disk_points():
    point = DiskPoint(modulus=0.9, angle=0.3)
    assert np.isclose(mobius_phase(point, 1.0), mobius_phase(W, 1.0))


def test_first_derivative_matches_central_difference():
    x = np.linspace(-3.0, 3.0, 101)
    h = 1e-6
    numeric = reduce_angle(mobius_phase(W, x + h) - mobius_phase(W, x - h)) / (2 * h)
    assert np.allclose(mobius_phase_deriv(W, x), numeric, rtol=1e-6, atol=1e-6)


def test_second_derivative_matches_central_difference():
    x = np.linspace(-3.0, 3.0, 101)
    h = 1e-6
    numeric = (mobius_phase_deriv(W, x + h) - mobius_phase_deriv(W, x - h)) / (2 * h)
    assert np.allclose(mobius_phase_deriv(W, x, order=2), numeric, rtol=1e-5, atol=1e-4)


def test_derivative_order_is_checked():
    with pytest.raises(InvalidArgumentError):
        mobius_phase_deriv(W, 0.0, order=3)


def test_phase_table_rows_accumulate():
    seq = make_sequence(constants.KIND_A_R, r=0.75)
    grid = make_grid(64)
    table = build_phase_table(seq, grid)
    assert table.psi.shape == (seq.length + 1, 64)
    assert np.all(table.row(0) == 0.0)
    for n in seq.indices:
        step = table.row(n) - table.row(n - 1)
        assert np.allclose(step, mobius_phase(seq.point(n), grid.points))


def test_phase_table_budget_guard():
    seq = make_sequence(constants.KIND_A_R, r=0.75)
    with pytest.raises(ResourceGuardError) as info:
        build_phase_table(seq, make_grid(64), budget=100)
    assert info.value.required == 5 * 64
    assert info.value.limit == 100


def test_blaschke_product_on_circle_is_phase():
    seq = make_sequence(constants.KIND_A_R, r=0.75)
    grid = make_grid(64)
    table = build_phase_table(seq, grid)
    z = np.exp(1j * grid.points)
    for n in range(0, seq.i_max + 1):
        values = blaschke_eval(seq, n, z)
        assert np.allclose(np.abs(values), 1.0)
        assert np.allclose(values, table.phase(n))


def test_blaschke_product_vanishes_at_points():
    seq = make_sequence(constants.KIND_A_R, r=0.75)
    assert abs(blaschke_eval(seq, 2, seq.point(2))) < 1e-15
    with pytest.raises(InvalidArgumentError):
        blaschke_eval(seq, 2, 1.5)
    with pytest.raises(InvalidArgumentError):
        blaschke_eval(seq, seq.i_max + 1, 0.0)


def test_cell_index():
    assert cell_index(0.75, 0.1) == 0
    assert cell_index(0.75, -0.1) == -1
    assert cell_index(0.75, np.pi / 2 + 1e-9) == 1
    with pytest.raises(InvalidArgumentError):
        cell_index(1.0, 0.1)


@pytest.mark.parametrize("r", [0.9, 0.99, 0.999])
def test_decomposition_ratio_is_bounded(r):
    ratio = decomposition_ratio(r, np.linspace(-np.pi, np.pi, 4001))
    assert ratio.min() >= 0.5
    assert ratio.max() <= 10.0


def test_asymptotic_coefficient_two_keeps_envelope_bounded():
    x = np.logspace(-9, 0, 4000)
    for k in range(6, 15):
        r = 1.0 - 2.0 ** (-k)
        assert asymptotic_envelope_ratio(r, x).max() <= 4.0


def test_asymptotic_coefficient_one_grows():
    x = np.logspace(-9, 0, 4000)
    ratio = asymptotic_envelope_ratio(1.0 - 2.0 ** (-14), x, coefficient=1.0)
    assert ratio.max() > 20.0


@pytest.mark.parametrize("r", [0.75, 0.9375, 1.0 - 2.0 ** -10])
def test_rotation_symmetry_of_a_r(r, rng):
    x = rng.uniform(-np.pi, np.pi, 500)
    for j in (1, 2, 7):
        assert rotation_residual(r, j, x) < 1e-10


def test_conjugate_reflection(rng):
    y = rng.uniform(-np.pi, np.pi, 500)
    assert conjugate_reflection_residual(W, y) < 1e-12
    assert conjugate_reflection_residual(0.0, y) < 1e-12


def test_polar_phase_matches_mobius_phase():
    x = np.linspace(-np.pi, np.pi, 257)
    for r, angle in ((0.5, 0.0), (0.9375, 1.2), (1.0 - 2.0 ** -10, -2.9)):
        assert np.allclose(polar_phase(r, angle, x), mobius_phase(r * np.exp(1j * angle), x), atol=1e-10)
    angles = np.array([0.3, -1.1, 2.5])
    points = np.array([0.1, 0.2, -0.4])
    expected = [mobius_phase(0.75 * np.exp(1j * a), p) for a, p in zip(angles, points)]
    assert np.allclose(polar_phase(0.75, angles, points), expected, atol=1e-12)
