"""
Configuración general de mtkit
Carga variables de entorno y define constantes numéricas
"""
from pydantic_settings import BaseSettings
from typing import List
from functools import lru_cache
import logging.config
import math
import os


class Settings(BaseSettings):
    """Configuración de la aplicación usando Pydantic"""

    # Servidor
    api_host: str = "0.0.0.0"
    api_port: int = 8000
    debug_mode: bool = False

    # CORS
    allowed_origins: str = "http://localhost:3000,http://localhost:8501"

    # Rate Limiting (formato aceptado por slowapi/limits, e.g. "5/minute")
    rate_limit_per_minute: int = 60
    compute_limit: str = "30/minute"
    experiment_limit: str = "3/minute"
    # Redis (opcional); vacío = almacenamiento en memoria
    redis_url: str = ""
    max_request_size_mb: int = 4

    # Guardas de recursos
    phase_table_budget: int = 2 ** 28
    samples_per_pole: int = 64
    quadratic_form_max_points: int = 2 ** 13
    model_max_support: int = 2 ** 13
    unwind_max_grid: int = 2 ** 13
    max_k: int = 10
    max_lacunary_m: int = 14
    max_corollary_m: int = 8

    # Tolerancias numéricas
    disk_modulus_margin: float = 1e-15
    boundary_root_tolerance: float = 1e-9
    root_residual_tolerance: float = 1e-10
    division_remainder_tolerance: float = 1e-8

    # Experimentos
    default_grid: int = 1024
    default_seed: int = 20240607
    n_jobs: int = 1
    output_dir: str = "./results"
    calibration_file: str = "./results/constants.json"
    calibration_factor: float = 2.0
    probe_lambda: int = 8

    # Logs
    log_level: str = "INFO"
    log_file: str = "./logs/mtkit.log"

    # Entorno
    environment: str = "development"
    testing: bool = False  # Bandera para modo testing

    class Config:
        env_file = ".env"
        env_prefix = "MTKIT_"
        case_sensitive = False

    @property
    def allowed_origins_list(self) -> List[str]:
        """Convierte string de orígenes permitidos en lista"""
        return [origin.strip() for origin in self.allowed_origins.split(",")]

    @property
    def max_request_size_bytes(self) -> int:
        """Convierte MB a bytes"""
        return self.max_request_size_mb * 1024 * 1024

    @property
    def modulus_cap(self) -> float:
        """Módulo máximo admitido para un punto del disco"""
        return 1.0 - self.disk_modulus_margin


@lru_cache()
def get_settings() -> Settings:
    """
    Obtiene la configuración de la aplicación (singleton)
    lru_cache asegura que solo se cree una instancia
    """
    return Settings()


# Constantes de la aplicación
class AppConstants:
    """Constantes usadas en toda la aplicación"""

    # Familias de sucesiones
    KIND_A_R = "a_r"
    KIND_B = "b"
    KIND_D_R = "d_r"
    KIND_CUSTOM = "custom"

    SEQUENCE_KINDS = [KIND_A_R, KIND_B, KIND_D_R, KIND_CUSTOM]

    # Métodos de suma parcial
    METHOD_COEFFICIENT = "coefficient"
    METHOD_KERNEL = "kernel"

    PARTIAL_SUM_METHODS = [METHOD_COEFFICIENT, METHOD_KERNEL]

    # Realizaciones de H̃
    TILDE_MULTIPLIER = "multiplier"
    TILDE_KERNEL = "kernel"

    # Experimentos disponibles
    EXP_THM1 = "thm1"
    EXP_COUNTEREXAMPLE = "counterexample"
    EXP_LACUNARY = "lacunary"
    EXP_COROLLARY_B = "corollary-b"
    EXP_TTSTAR = "ttstar"
    EXP_MODEL = "model"
    EXP_PROBE = "probe"

    EXPERIMENTS = [
        EXP_THM1,
        EXP_COUNTEREXAMPLE,
        EXP_LACUNARY,
        EXP_COROLLARY_B,
        EXP_TTSTAR,
        EXP_MODEL,
        EXP_PROBE
    ]

    # Columnas de los CSV
    GRID_FUNCTION_COLUMNS = ["theta", "re", "im"]
    SEQUENCE_COLUMNS = ["index", "modulus", "angle"]
    BASIS_COLUMNS = ["n", "theta", "re", "im"]
    EXPANSION_COLUMNS = ["n", "coeff_re", "coeff_im"]
    LEVEL_COLUMNS = ["theta", "level"]
    PROBE_COLUMNS = ["trial", "r", "lambda", "sigma", "g_norm_sq", "ratio"]

    CSV_FLOAT_FORMAT = "%.17g"

    # Códigos de salida del CLI
    EXIT_INVALID_ARGUMENT = 2
    EXIT_RESOURCE_GUARD = 3
    EXIT_NUMERIC_INSTABILITY = 4

    # Constante de dilatación literal del caso modelo
    LITERAL_DILATION = math.exp(2.0 * math.pi ** 2)


# Configuración de logging
LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "default": {
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        },
        "detailed": {
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "default",
            "level": "INFO",
        },
        "file": {
            "class": "logging.handlers.RotatingFileHandler",
            "formatter": "detailed",
            "filename": "logs/mtkit.log",
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
            "level": "DEBUG",
        },
    },
    "loggers": {
        "uvicorn": {
            "handlers": ["console", "file"],
            "level": "INFO",
        },
        "mtkit": {
            "handlers": ["console", "file"],
            "level": "DEBUG",
        },
    },
}


def setup_logging() -> None:
    """Aplica LOGGING_CONFIG con el archivo y nivel configurados"""
    config = {
        **LOGGING_CONFIG,
        "handlers": {name: dict(handler) for name, handler in LOGGING_CONFIG["handlers"].items()},
        "loggers": {name: dict(logger) for name, logger in LOGGING_CONFIG["loggers"].items()},
    }
    config["handlers"]["console"]["level"] = settings.log_level.upper()

    if settings.testing:
        # Sin archivo de logs en pruebas
        del config["handlers"]["file"]
        for logger_config in config["loggers"].values():
            logger_config["handlers"] = ["console"]
    else:
        log_dir = os.path.dirname(settings.log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        config["handlers"]["file"]["filename"] = settings.log_file

    logging.config.dictConfig(config)


# Exportar configuración
settings = get_settings()
constants = AppConstants()
