import numpy as np
import pytest

from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.unwinding import PolynomialH2
from mtkit.services.circle import make_grid
from mtkit.services.unwinding import (
    bessel_gap,
    blaschke_factorize,
    block_product,
    boundary_points,
    energy_defects,
    expansion_error,
    planted_polynomial,
    poly_roots,
    random_polynomial,
    telescoping_errors,
    unwind,
    unwind_to_mt
)

# F(z) = 1 + z(z − 1/2)(z − 2)
EXAMPLE = PolynomialH2(coefficients=[1.0, 1.0, -2.5, 1.0])


def test_polynomial_trims_trailing_zeros():
    p = PolynomialH2(coefficients=[1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert PolynomialH2(coefficients=[0.0, 0.0]).is_zero
    assert PolynomialH2(coefficients=[]).is_zero
    assert p.without_constant().coefficients.tolist() == [0.0, 2.0]
    assert np.isclose(p.norm(), np.sqrt(5.0))


def test_roots():
    roots = sorted(poly_roots(PolynomialH2(coefficients=[-1.0, 0.0, 1.0])), key=lambda z: z.real)
    assert np.allclose(roots, [-1.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        poly_roots(PolynomialH2(coefficients=[0.0]))
    with pytest.raises(InvalidArgumentError):
        poly_roots(PolynomialH2(coefficients=[3.0]))


def test_roots_at_origin_are_exact():
    roots = poly_roots(planted_polynomial([0.0, 0.0, 0.5]))
    assert sum(1 for z in roots if z == 0) == 2
    assert any(np.isclose(z, 0.5) for z in roots)


def test_blaschke_factorization():
    p = planted_polynomial([0.5, 2.0])
    factorization = blaschke_factorize(p)
    assert np.allclose(factorization.roots, [0.5])
    assert np.allclose(factorization.quotient.coefficients, [-2.0, 2.0, -0.5])
    z = boundary_points(256)
    assert np.allclose(p.evaluate(z), block_product(factorization.roots, z) * factorization.quotient.evaluate(z))
    assert np.allclose(np.abs(p.evaluate(z)), np.abs(factorization.quotient.evaluate(z)))


def test_boundary_roots_stay_in_the_quotient():
    p = planted_polynomial([1.0])
    factorization = blaschke_factorize(p)
    assert factorization.roots == []
    assert np.allclose(factorization.quotient.coefficients, p.coefficients)


def test_unwinding_example():
    result = unwind(EXAMPLE, 10)
    assert result.terminated
    assert len(result.steps) == 4
    assert np.allclose(result.constants, [1.0, -2.0, 2.0, -0.5], atol=1e-12)
    assert len(result.blocks) == 3
    assert np.allclose(result.blocks[0], [0.0, 0.5], atol=1e-12)
    assert result.blocks[1] == [0j]
    assert result.blocks[2] == [0j]
    assert result.residual.is_zero
    assert abs(bessel_gap(result)) < 1e-12
    assert max(telescoping_errors(result)) < 1e-12
    assert expansion_error(result) < 1e-12
    assert max(energy_defects(result)) < 1e-12


def test_unwinding_records():
    record = unwind(EXAMPLE, 10).steps[0].record()
    assert record["k"] == 0
    assert record["Fk0_re"] == pytest.approx(1.0)
    assert record["Fk0_im"] == 0.0
    assert len(record["roots"]) == 2


def test_zero_steps_keeps_residual():
    result = unwind(EXAMPLE, 0)
    assert not result.terminated
    assert len(result.steps) == 1
    assert np.allclose(result.residual.coefficients, [0.0, 1.0, -2.5, 1.0])
    assert expansion_error(result) < 1e-12
    with pytest.raises(InvalidArgumentError):
        unwind(EXAMPLE, -1)


def test_unwinding_random_polynomial(rng):
    F = random_polynomial(rng, 6)
    result = unwind(F, 8)
    scale = F.norm() ** 2
    assert bessel_gap(result) >= -1e-9 * scale
    assert max(telescoping_errors(result)) < 1e-8 * F.norm()
    assert max(energy_defects(result), default=0.0) < 1e-8 * scale
    assert all(abs(root) < 1.0 for block in result.blocks for root in block)


def test_unwinding_matches_mt_partial_sums():
    comparison = unwind_to_mt(unwind(EXAMPLE, 10), make_grid(1024))
    assert comparison.boundaries == [2, 3, 4]
    assert comparison.resolved
    assert comparison.max_discrepancy < 1e-8


def test_mt_comparison_without_blocks():
    comparison = unwind_to_mt(unwind(PolynomialH2(coefficients=[2.0]), 3), make_grid(64))
    assert comparison.boundaries == []
    assert comparison.max_discrepancy == 0.0


def test_unwinding_degree_eight_terminates(rng):
    F = random_polynomial(rng, 8)
    result = unwind(F, 10)
    scale = F.norm() ** 2
    # cada paso divide por la raíz en el origen
    assert result.terminated
    assert len(result.steps) <= 9
    assert abs(bessel_gap(result)) < 1e-8 * scale
    assert max(telescoping_errors(result)) < 1e-8 * F.norm()
    assert max(energy_defects(result), default=0.0) < 1e-8 * scale


def test_planted_roots_are_recovered():
    planted = [
        0.3 * np.exp(0.4j), 0.45 * np.exp(1.3j), 0.5 * np.exp(2.2j), 0.6 * np.exp(3.0j),
        0.65 * np.exp(-2.5j), 0.7 * np.exp(-1.6j), 0.75 * np.exp(-0.8j), 0.8
    ]
    roots = poly_roots(planted_polynomial(planted))
    assert len(roots) == 8
    for a in planted:
        assert min(abs(z - a) for z in roots) < 1e-8
    factorization = blaschke_factorize(planted_polynomial(planted))
    assert len(factorization.roots) == 8


def test_factorization_of_z_times_z_minus_two():
    factorization = blaschke_factorize(PolynomialH2(coefficients=[0.0, -2.0, 1.0]))
    assert factorization.roots == [0j]
    assert np.allclose(factorization.quotient.coefficients, [-2.0, 1.0])

    result = unwind(PolynomialH2(coefficients=[0.0, -2.0, 1.0]), 5)
    assert result.terminated
    assert np.allclose(result.constants, [0.0, -2.0, 1.0])


def test_unwinding_of_random_polynomial_matches_mt_partial_sums(rng):
    for _ in range(100):
        F = random_polynomial(rng, 8)
        result = unwind(F, 10)
        moduli = [abs(root) for block in result.blocks for root in block]
        if max(moduli) <= 0.99:
            break
    else:
        pytest.fail("no random polynomial with roots inside |z| <= 0.99")

    comparison = unwind_to_mt(result, make_grid(8192))
    assert comparison.resolved
    assert comparison.boundaries
    assert comparison.max_discrepancy <= 1e-6 * F.norm()


def test_mt_comparison_grid_guard():
    with pytest.raises(ResourceGuardError):
        unwind_to_mt(unwind(EXAMPLE, 10), make_grid(2 ** 14))
