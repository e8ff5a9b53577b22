"""
Servicio de calibración
Calibrar una vez, congelar y verificar las constantes implícitas de los experimentos
"""
import json
import logging
import math
import os
from typing import Dict, Optional

from mtkit.config import settings
from mtkit.exceptions import CalibrationDriftError, InvalidArgumentError

logger = logging.getLogger(__name__)


def load_constants(path: Optional[str] = None) -> Dict[str, Dict[str, float]]:
    path = settings.calibration_file if path is None else path
    if not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"calibration file {path} is not valid JSON") from exc


def calibrate(name: str, summary: Dict[str, float], path: Optional[str] = None) -> str:
    """Guarda las constantes finitas del experimento bajo su nombre"""
    path = settings.calibration_file if path is None else path
    stored = load_constants(path)
    stored[name] = {key: float(value) for key, value in summary.items() if math.isfinite(value)}
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(stored, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info(f"✓ Constantes de {name} congeladas en {path}")
    return path


def check(
    name: str,
    summary: Dict[str, float],
    path: Optional[str] = None,
    factor: Optional[float] = None
) -> Dict[str, float]:
    """
    Compara con las constantes congeladas; cada razón medida/guardada debe caer en [1/factor, factor]

    Devuelve las razones. Lanza CalibrationDriftError en la primera constante fuera de banda.
    """
    path = settings.calibration_file if path is None else path
    factor = settings.calibration_factor if factor is None else factor
    stored = load_constants(path).get(name)
    if stored is None:
        raise InvalidArgumentError(f"no frozen constants for {name!r} in {path}; run with --calibrate first")

    ratios = {}
    for key, frozen in stored.items():
        measured = summary.get(key)
        if measured is None or not math.isfinite(measured):
            continue
        if frozen == 0.0 or measured == 0.0:
            ratio = 1.0 if frozen == measured else math.inf
        else:
            ratio = abs(measured / frozen)
        ratios[key] = ratio
        if not 1.0 / factor <= ratio <= factor:
            logger.warning(f"Deriva en {name}.{key}: medido {measured:.6g}, congelado {frozen:.6g}")
            raise CalibrationDriftError(
                f"{name}.{key} drifted: measured {measured:.6g}, frozen {frozen:.6g} (factor {factor:g})"
            )
    logger.info(f"✓ Constantes de {name} dentro de la banda ×{factor:g}")
    return ratios
