"""
Router de sucesiones
Generación de sucesiones del disco y reporte de ortonormalidad de la base MT
"""
from fastapi import APIRouter, Request
import numpy as np

from mtkit.config import settings, constants
from mtkit.limiter import limiter
from mtkit.models.basis import OrthonormalityRequest, OrthonormalityResponse
from mtkit.models.sequence import MTSequence, PointOut, SequenceRequest, SequenceResponse
from mtkit.services.circle import make_grid
from mtkit.services.mt_system import (
    build_basis,
    make_sequence,
    orthonormality_deviation,
    required_grid_size
)
from mtkit.exceptions import InvalidArgumentError

router = APIRouter()


def sequence_from_request(payload: SequenceRequest) -> MTSequence:
    """Traduce la petición a una MTSequence"""
    points = None
    if payload.kind == constants.KIND_CUSTOM:
        if len(payload.points_re) != len(payload.points_im):
            raise InvalidArgumentError("points_re and points_im must have the same length")
        points = np.asarray(payload.points_re) + 1j * np.asarray(payload.points_im)
    return make_sequence(
        payload.kind,
        r=payload.r,
        length=payload.length,
        extended=payload.extended,
        points=points
    )


@router.post("", response_model=SequenceResponse)
@limiter.limit(settings.compute_limit)
def create_sequence(request: Request, payload: SequenceRequest):
    """
    Generar una sucesión a_r, b, d_r o custom

    Devuelve cada punto con su índice, módulo y argumento.
    """
    seq = sequence_from_request(payload)
    return SequenceResponse(
        kind=seq.kind,
        i_min=seq.i_min,
        i_max=seq.i_max,
        params=seq.params,
        points=[
            PointOut(index=int(n), modulus=float(abs(w)), angle=float(np.angle(w)))
            for n, w in zip(seq.indices, seq.points)
        ]
    )


@router.post("/orthonormality", response_model=OrthonormalityResponse)
@limiter.limit(settings.compute_limit)
def orthonormality(request: Request, payload: OrthonormalityRequest):
    """max |⟨φ_i, φ_j⟩ − δ_ij| por cuadratura en la malla pedida"""
    seq = sequence_from_request(payload.sequence)
    grid = make_grid(payload.grid)
    basis = build_basis(seq, grid, unsafe=payload.unsafe)
    return OrthonormalityResponse(
        n_functions=basis.size,
        grid=grid.n_points,
        max_deviation=orthonormality_deviation(basis),
        required_grid=required_grid_size(seq)
    )
