"""
Servicio de entrada/salida
CSV (pandas), JSON-lines y archivo de configuración key=value
"""
import json
import logging
import os
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from mtkit.config import constants
from mtkit.exceptions import InvalidArgumentError
from mtkit.models.basis import MTBasis, MTExpansion
from mtkit.models.circle import GridFunction
from mtkit.models.levels import LevelFunction
from mtkit.models.sequence import MTSequence
from mtkit.services.circle import make_grid

logger = logging.getLogger(__name__)


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(frame: pd.DataFrame, path: str) -> str:
    """CSV con float_format %.17g: mismos datos ⇒ mismos bytes"""
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=constants.CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"✓ CSV escrito: {path} ({len(frame)} filas)")
    return path


def read_csv(path: str, columns: Optional[Iterable[str]] = None) -> pd.DataFrame:
    if not os.path.exists(path):
        raise InvalidArgumentError(f"CSV file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise InvalidArgumentError(f"CSV file is empty: {path}") from exc
    if columns is not None:
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise InvalidArgumentError(f"CSV {path} is missing columns {missing}")
    return frame


def write_jsonl(records: Iterable[dict], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    logger.info(f"✓ JSON-lines escrito: {path}")
    return path


def read_config_file(path: str) -> dict:
    """
    Archivo key=value (formato .env); las claves admiten '-' o '_'

    Devuelve un dict con claves en minúsculas y '_', listo para el default_map de click.
    """
    if not os.path.exists(path):
        raise InvalidArgumentError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None
    }


# ============= VOLCADOS DE OBJETOS =============

def grid_function_frame(f: GridFunction) -> pd.DataFrame:
    values = np.asarray(f.values, dtype=np.complex128)
    return pd.DataFrame({
        "theta": f.grid.points,
        "re": values.real,
        "im": values.imag
    }, columns=constants.GRID_FUNCTION_COLUMNS)


def read_grid_function(path: str) -> GridFunction:
    """Lee un CSV theta,re,im; el número de filas fija la malla"""
    frame = read_csv(path, constants.GRID_FUNCTION_COLUMNS)
    grid = make_grid(len(frame))
    expected = grid.points
    if not np.allclose(frame["theta"].to_numpy(), expected, atol=1e-12):
        raise InvalidArgumentError(f"theta column of {path} is not the uniform grid of {len(frame)} points")
    values = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    return GridFunction(grid=grid, values=values)


def sequence_frame(seq: MTSequence) -> pd.DataFrame:
    return pd.DataFrame({
        "index": seq.indices,
        "modulus": np.abs(seq.points),
        "angle": np.angle(seq.points)
    }, columns=constants.SEQUENCE_COLUMNS)


def basis_frame(basis: MTBasis) -> pd.DataFrame:
    n_points = basis.grid.n_points
    return pd.DataFrame({
        "n": np.repeat(basis.indices, n_points),
        "theta": np.tile(basis.grid.points, basis.size),
        "re": basis.phi.real.reshape(-1),
        "im": basis.phi.imag.reshape(-1)
    }, columns=constants.BASIS_COLUMNS)


def expansion_frame(expansion: MTExpansion) -> pd.DataFrame:
    return pd.DataFrame({
        "n": np.arange(expansion.first_index, expansion.last_index + 1),
        "coeff_re": expansion.coefficients.real,
        "coeff_im": expansion.coefficients.imag
    }, columns=constants.EXPANSION_COLUMNS)


def level_frame(levels: LevelFunction) -> pd.DataFrame:
    return pd.DataFrame({
        "theta": levels.grid.points,
        "level": levels.levels
    }, columns=constants.LEVEL_COLUMNS)
