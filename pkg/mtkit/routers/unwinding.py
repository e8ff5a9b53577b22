"""
Router de desenrollado de fase
"""
from fastapi import APIRouter, Request

from mtkit.config import settings
from mtkit.limiter import limiter
from mtkit.models.unwinding import PolynomialH2, UnwindRequest, UnwindResponse
from mtkit.services.circle import make_grid
from mtkit.services.unwinding import (
    bessel_gap,
    split_coefficients,
    telescoping_errors,
    unwind,
    unwind_to_mt
)

router = APIRouter()


@router.post("", response_model=UnwindResponse)
@limiter.limit(settings.compute_limit)
def unwind_polynomial(request: Request, payload: UnwindRequest):
    """
    Desenrollar F = Σ c_k z^k

    Devuelve un registro por paso (k, F_k(0), raíces de B_{k+1}, resto de división),
    el error telescópico, la brecha de Bessel y la discrepancia con la serie MT.
    """
    real, imag = split_coefficients(payload.coefficients_re, payload.coefficients_im)
    F = PolynomialH2(coefficients=real + 1j * imag)
    result = unwind(F, payload.steps)
    comparison = unwind_to_mt(result, make_grid(payload.grid))
    return UnwindResponse(
        steps=[step.record() for step in result.steps],
        terminated=result.terminated,
        residual_norm=result.residual.norm(),
        bessel_gap=bessel_gap(result),
        telescoping_error=max(telescoping_errors(result)),
        max_mt_discrepancy=comparison.max_discrepancy
    )
