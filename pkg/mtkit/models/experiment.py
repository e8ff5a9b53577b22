"""
Modelos de experimentos
Configuración de una corrida, resultado tabular y especificación de gráficas
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, List, Optional
import pandas as pd

from mtkit.config import settings, constants
from mtkit.models.circle import is_power_of_two


class ExperimentConfig(BaseModel):
    """Parámetros de un experimento (r = 1 − 2^{−k})"""
    name: str
    k_min: int = Field(4, ge=1)
    k_max: int = Field(9, ge=1)
    grid: int = Field(default_factory=lambda: settings.default_grid, ge=2)
    trials: int = Field(4, ge=0)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0, lt=2 ** 64)
    m_max: Optional[int] = Field(None, ge=1)
    lam: int = Field(default_factory=lambda: settings.probe_lambda, ge=4)
    support_size: int = Field(512, ge=1, description="Tamaño de soporte del caso modelo")
    n_jobs: int = Field(default_factory=lambda: settings.n_jobs)
    unsafe: bool = False

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "name": "thm1",
                "k_min": 4,
                "k_max": 6,
                "grid": 1024,
                "trials": 2,
                "seed": 20240607
            }
        }

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        if v not in constants.EXPERIMENTS:
            raise ValueError(f"unknown experiment {v!r}; expected one of {constants.EXPERIMENTS}")
        return v

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: int) -> int:
        if not is_power_of_two(v):
            raise ValueError(f"grid size must be a power of two, got {v}")
        return v

    @model_validator(mode="after")
    def check_range(self):
        if self.k_min > self.k_max:
            raise ValueError(f"k_min {self.k_min} exceeds k_max {self.k_max}")
        return self

    @property
    def k_values(self) -> List[int]:
        return list(range(self.k_min, self.k_max + 1))


class ExperimentResult(BaseModel):
    """Filas del CSV y constantes resumen (para calibrar)"""
    name: str
    frame: pd.DataFrame
    summary: Dict[str, float]

    class Config:
        arbitrary_types_allowed = True


class PlotSpec(BaseModel):
    """Columnas y estilo de una gráfica"""
    x: str
    y: List[str] = Field(..., min_length=1)
    kind: str = "line"
    title: str = ""
    logy: bool = False

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str) -> str:
        if v not in ("line", "scatter"):
            raise ValueError("plot kind must be 'line' or 'scatter'")
        return v


# Gráfica por omisión de cada experimento
DEFAULT_PLOTS: Dict[str, PlotSpec] = {
    constants.EXP_THM1: PlotSpec(x="k", y=["ratio"], title="Razón maximal, sucesión a_r"),
    constants.EXP_COUNTEREXAMPLE: PlotSpec(x="k", y=["ratio_sq"], title="Razón² maximal, sucesión d_r"),
    constants.EXP_LACUNARY: PlotSpec(x="m", y=["D_minus_n", "psi2_max"], title="Bloques lacunares", logy=True),
    constants.EXP_COROLLARY_B: PlotSpec(x="m", y=["ratio"], title="Razón maximal, sucesión b"),
    constants.EXP_TTSTAR: PlotSpec(x="trial", y=["gap_ratio"], kind="scatter", title="Identidad TT*"),
    constants.EXP_MODEL: PlotSpec(x="min_gap", y=["deviation"], kind="scatter", title="Caso modelo", logy=True),
    constants.EXP_PROBE: PlotSpec(x="trial", y=["ratio"], kind="scatter", title="Sonda Σ/‖g‖²")
}


# ============= MODELOS DE LA API =============

class ExperimentRunRequest(BaseModel):
    """Corrida pequeña de un experimento por HTTP"""
    name: str
    k_min: int = Field(4, ge=1, le=6)
    k_max: int = Field(5, ge=1, le=6)
    grid: int = Field(1024, ge=2, le=4096)
    trials: int = Field(2, ge=0, le=8)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    m_max: Optional[int] = Field(None, ge=1, le=8)

    class Config:
        json_schema_extra = {
            "example": {
                "name": "lacunary",
                "m_max": 6
            }
        }


class ExperimentRunResponse(BaseModel):
    """Filas y resumen de la corrida"""
    name: str
    rows: List[dict]
    summary: Dict[str, Optional[float]]
