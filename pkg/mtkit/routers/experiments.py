"""
Router de experimentos
Lista de experimentos y corridas pequeñas con respuesta JSON
"""
from fastapi import APIRouter, Request
import math
import numpy as np

from mtkit.config import settings, constants
from mtkit.limiter import limiter
from mtkit.models.experiment import ExperimentConfig, ExperimentRunRequest, ExperimentRunResponse
from mtkit.services.experiments import run_experiment

router = APIRouter()


EXPERIMENT_DESCRIPTIONS = {
    constants.EXP_THM1: "Razón maximal para a_r, r = 1 − 2^{−k} (planitud)",
    constants.EXP_COUNTEREXAMPLE: "Razón maximal para d_r y cota puntual (crecimiento)",
    constants.EXP_LACUNARY: "Sumas de Ψ′ y Ψ″ por bloques de b",
    constants.EXP_COROLLARY_B: "Razón maximal para b truncada en 2^m",
    constants.EXP_TTSTAR: "Identidad ‖T_N*g‖² ≈ 2B(g, N)",
    constants.EXP_MODEL: "Caso modelo T(β) ≈ −T(α)/e^{2π²}",
    constants.EXP_PROBE: "Cantidad combinada Σ sobre pares asociados"
}


def _json_safe(value):
    """NaN e infinitos no son JSON válido"""
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


@router.get("")
async def list_experiments():
    """Listar experimentos disponibles"""
    return {
        "total": len(constants.EXPERIMENTS),
        "experiments": [
            {"name": name, "description": EXPERIMENT_DESCRIPTIONS[name]}
            for name in constants.EXPERIMENTS
        ]
    }


@router.post("/run", response_model=ExperimentRunResponse)
@limiter.limit(settings.experiment_limit)
def run(request: Request, payload: ExperimentRunRequest):
    """
    Ejecutar un experimento con una configuración pequeña

    Los rangos están acotados por el modelo de la petición; corridas grandes van por el CLI.
    """
    cfg = ExperimentConfig(
        name=payload.name,
        k_min=payload.k_min,
        k_max=payload.k_max,
        grid=payload.grid,
        trials=payload.trials,
        seed=payload.seed,
        m_max=payload.m_max,
        n_jobs=1
    )
    result = run_experiment(cfg)
    rows = [
        {key: _json_safe(value) for key, value in row.items()}
        for row in result.frame.to_dict(orient="records")
    ]
    return ExperimentRunResponse(
        name=result.name,
        rows=rows,
        summary={key: _json_safe(value) for key, value in result.summary.items()}
    )
