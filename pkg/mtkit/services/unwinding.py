"""
Servicio de desenrollado de fase
Raíces de polinomios, factorización de Blaschke, iteración F_n = (F_{n−1} − F_{n−1}(0))/B_n
y comparación con la serie MT
"""
import logging
from typing import List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from mtkit.config import settings, constants
from mtkit.exceptions import InvalidArgumentError, NumericInstabilityError, ResourceGuardError
from mtkit.models.circle import CircleGrid, GridFunction
from mtkit.models.unwinding import (
    BlaschkeFactorization,
    MTComparison,
    PolynomialH2,
    UnwindingResult,
    UnwindStep
)
from mtkit.services.blaschke import mobius_factor
from mtkit.services.mt_system import build_basis, make_sequence, partial_sum, required_grid_size

logger = logging.getLogger(__name__)


# ============= RAÍCES =============

def _newton_polish(coefficients: np.ndarray, root: complex, iterations: int = 3) -> complex:
    derivative = P.polyder(coefficients)
    best, best_residual = root, abs(P.polyval(root, coefficients))
    z = root
    for _ in range(iterations):
        slope = P.polyval(z, derivative)
        if slope == 0:
            break
        z = z - P.polyval(z, coefficients) / slope
        residual = abs(P.polyval(z, coefficients))
        if residual < best_residual:
            best, best_residual = z, residual
    return complex(best)


def poly_roots(p: PolynomialH2) -> List[complex]:
    """
    Las d raíces con multiplicidad

    Los ceros en el origen se separan exactamente (coeficientes bajos nulos);
    el resto sale de los autovalores de la matriz compañera con pulido de Newton.
    """
    if p.is_zero:
        raise InvalidArgumentError("the zero polynomial has no finite root set")
    if p.degree < 1:
        raise InvalidArgumentError("roots need a polynomial of degree >= 1")

    coefficients = p.coefficients
    zeros_at_origin = int(np.flatnonzero(coefficients)[0])
    reduced = coefficients[zeros_at_origin:]
    roots = [0j] * zeros_at_origin
    if reduced.size > 1:
        roots += [_newton_polish(reduced, complex(z)) for z in P.polyroots(reduced)]

    scale = np.sqrt(np.sum(np.abs(coefficients) ** 2))
    worst = max(abs(P.polyval(z, coefficients)) for z in roots)
    if worst > settings.root_residual_tolerance * scale:
        logger.error(f"Residuo de raíz {worst:.3g} sobre la tolerancia")
        raise NumericInstabilityError(
            f"root residual {worst:.3g} exceeds {settings.root_residual_tolerance:g}·‖p‖"
        )
    return roots


# ============= FACTORIZACIÓN DE BLASCHKE =============

def blaschke_factorize(p: PolynomialH2) -> BlaschkeFactorization:
    """
    p = B·q con B el producto de Blaschke de las raíces con |a| < 1 − tolerancia

    Cada raíz interior se divide por (z − a) y se multiplica por (1 − āz)·a/|a|;
    para a = 0 solo se divide por z.
    """
    if p.degree < 1:
        return BlaschkeFactorization(roots=[], quotient=p, remainders=[])

    limit = 1.0 - settings.boundary_root_tolerance
    inside = sorted((z for z in poly_roots(p) if abs(z) < limit), key=abs)
    scale = p.norm()

    quotient = p.coefficients.copy()
    remainders = []
    for a in inside:
        if a == 0:
            remainder = abs(quotient[0])
            quotient = quotient[1:]
        else:
            divided, rest = P.polydiv(quotient, np.array([-a, 1.0], dtype=np.complex128))
            remainder = float(np.max(np.abs(rest)))
            quotient = P.polymul(divided, np.array([1.0, -np.conj(a)])) * (a / abs(a))
        remainders.append(float(remainder))
        if remainder > settings.division_remainder_tolerance * scale:
            logger.error(f"Resto de división {remainder:.3g} en la raíz {a:.6g}")
            raise NumericInstabilityError(
                f"division remainder {remainder:.3g} exceeds {settings.division_remainder_tolerance:g}·‖p‖"
            )

    return BlaschkeFactorization(
        roots=[complex(z) for z in inside],
        quotient=PolynomialH2(coefficients=quotient),
        remainders=remainders
    )


def block_product(roots: List[complex], z) -> np.ndarray:
    """B(z) = Π (ā/|a|)(z − a)/(1 − āz)"""
    z = np.asarray(z, dtype=np.complex128)
    out = np.ones_like(z)
    for a in roots:
        out = out * mobius_factor(a, z)
    return out


# ============= DESENROLLADO =============

def unwind(F: PolynomialH2, steps: int) -> UnwindingResult:
    """
    F_n = (F_{n−1} − F_{n−1}(0))/B_n

    Registra F_0(0), …, F_n(0); el residuo es F_n − F_n(0). Si F_k − F_k(0) es cero
    la serie terminó exactamente.
    """
    if steps < 0:
        raise InvalidArgumentError(f"steps must be >= 0, got {steps}")

    current = F
    records = []
    residual = PolynomialH2(coefficients=[0.0])
    terminated = False
    for k in range(steps + 1):
        constant = current.at_zero()
        shifted = current.without_constant()
        if shifted.is_zero:
            records.append(UnwindStep(k=k, polynomial=current, constant=constant))
            terminated = True
            break
        if k == steps:
            records.append(UnwindStep(k=k, polynomial=current, constant=constant))
            residual = shifted
            break
        factorization = blaschke_factorize(shifted)
        records.append(UnwindStep(
            k=k,
            polynomial=current,
            constant=constant,
            roots=factorization.roots,
            remainder=factorization.max_remainder
        ))
        current = factorization.quotient

    logger.info(f"✓ Desenrollado: {len(records)} pasos, terminado = {terminated}")
    return UnwindingResult(polynomial=F, steps=records, residual=residual, terminated=terminated)


def boundary_points(n_points: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n_points) / n_points)


def telescoping_errors(result: UnwindingResult, n_points: int = 512) -> List[float]:
    """
    Para cada m: sup |F − Σ_{k<m} F_k(0)B_1⋯B_k − F_m B_1⋯B_m| en el círculo
    """
    z = boundary_points(n_points)
    target = result.polynomial.evaluate(z)
    partial = np.zeros_like(z)
    product = np.ones_like(z)
    errors = []
    for step in result.steps:
        errors.append(float(np.max(np.abs(target - partial - step.polynomial.evaluate(z) * product))))
        partial = partial + step.constant * product
        product = product * block_product(step.roots, z)
    return errors


def expansion_error(result: UnwindingResult, n_points: int = 512) -> float:
    """sup |F − Σ_k F_k(0)B_1⋯B_k − residuo·B_1⋯B_n| en el círculo"""
    z = boundary_points(n_points)
    partial = np.zeros_like(z)
    product = np.ones_like(z)
    for step in result.steps:
        partial = partial + step.constant * product
        product = product * block_product(step.roots, z)
    return float(np.max(np.abs(result.polynomial.evaluate(z) - partial - result.residual.evaluate(z) * product)))


def energy_defects(result: UnwindingResult) -> List[float]:
    """| ‖F_k‖² − (‖F_{k−1}‖² − |F_{k−1}(0)|²) | por paso"""
    defects = []
    for previous, step in zip(result.steps, result.steps[1:]):
        expected = previous.polynomial.norm() ** 2 - abs(previous.constant) ** 2
        defects.append(abs(step.polynomial.norm() ** 2 - expected))
    return defects


def bessel_gap(result: UnwindingResult) -> float:
    """‖F‖² − Σ|F_k(0)|² (no negativo salvo redondeo; ‖residuo‖² al cerrar)"""
    return result.polynomial.norm() ** 2 - sum(abs(c) ** 2 for c in result.constants)


# ============= COMPARACIÓN CON LA SERIE MT =============

def unwind_to_mt(result: UnwindingResult, grid: CircleGrid) -> MTComparison:
    """
    Sucesión MT con las raíces de B_1, B_2, … concatenadas; en la frontera del bloque b
    compara U_b = Σ_{k<b} F_k(0)B_1⋯B_k con S_{n_b − 1}F, n_b = raíces en los bloques 1…b
    """
    if grid.n_points > settings.unwind_max_grid:
        raise ResourceGuardError(
            f"MT comparison limited to {settings.unwind_max_grid} grid points, got {grid.n_points}",
            required=grid.n_points,
            limit=settings.unwind_max_grid
        )
    blocks = result.blocks
    if not blocks:
        return MTComparison(boundaries=[], discrepancies=[], n_points=grid.n_points, resolved=True)

    roots = [root for block in blocks for root in block]
    seq = make_sequence(constants.KIND_CUSTOM, points=roots)
    resolved = grid.n_points >= required_grid_size(seq)
    if not resolved:
        logger.warning(
            f"Malla de {grid.n_points} puntos gruesa para max |a| = {seq.max_modulus:.6g}"
        )
    basis = build_basis(seq, grid, unsafe=True)

    z = np.exp(1j * grid.points)
    F = GridFunction(grid=grid, values=result.polynomial.evaluate(z))
    partial = np.zeros_like(z)
    product = np.ones_like(z)
    boundaries, discrepancies = [], []
    count = 0
    for step in result.steps:
        if not step.roots:
            break
        partial = partial + step.constant * product
        product = product * block_product(step.roots, z)
        count += len(step.roots)
        mt_sum = partial_sum(F, basis, count - 1)
        boundaries.append(count)
        discrepancies.append(float(np.sqrt(np.mean(np.abs(partial - mt_sum.values) ** 2))))

    return MTComparison(
        boundaries=boundaries,
        discrepancies=discrepancies,
        n_points=grid.n_points,
        resolved=resolved
    )


def random_polynomial(rng: np.random.Generator, degree: int) -> PolynomialH2:
    """Coeficientes gaussianos complejos de varianza unitaria"""
    coefficients = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / np.sqrt(2.0)
    return PolynomialH2(coefficients=coefficients)


def planted_polynomial(roots: List[complex], leading: complex = 1.0) -> PolynomialH2:
    """leading·Π(z − a)"""
    return PolynomialH2(coefficients=leading * P.polyfromroots(roots))


def split_coefficients(re: List[float], im=None) -> Tuple[np.ndarray, np.ndarray]:
    real = np.asarray(re, dtype=np.float64)
    imag = np.zeros_like(real) if im is None else np.asarray(im, dtype=np.float64)
    if imag.shape != real.shape:
        raise InvalidArgumentError("real and imaginary coefficient lists differ in length")
    return real, imag
