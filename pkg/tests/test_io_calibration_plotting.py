import json
import math
import os

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import pytest

from mtkit.config import constants
from mtkit.exceptions import CalibrationDriftError, InvalidArgumentError
from mtkit.models.experiment import DEFAULT_PLOTS, PlotSpec
from mtkit.services import calibration
from mtkit.services.circle import make_grid, random_band_limited
from mtkit.services.io import (
    basis_frame,
    grid_function_frame,
    read_config_file,
    read_csv,
    read_grid_function,
    sequence_frame,
    write_csv,
    write_jsonl
)
from mtkit.services.mt_system import build_basis, make_sequence
from mtkit.services.plotting import emit_plot


def read_bytes(path):
    with open(path, "rb") as handle:
        return handle.read()


def test_csv_is_byte_stable(out_dir):
    frame = pd.DataFrame({"k": [1, 2], "ratio": [1.0 / 3.0, math.pi]})
    first = write_csv(frame, os.path.join(out_dir, "a.csv"))
    second = write_csv(frame, os.path.join(out_dir, "b.csv"))
    assert read_bytes(first) == read_bytes(second)
    assert read_csv(first)["ratio"].tolist() == [1.0 / 3.0, math.pi]


def test_read_csv_errors(out_dir):
    with pytest.raises(InvalidArgumentError):
        read_csv(os.path.join(out_dir, "missing.csv"))
    path = write_csv(pd.DataFrame({"k": [1]}), os.path.join(out_dir, "k.csv"))
    with pytest.raises(InvalidArgumentError):
        read_csv(path, ["k", "ratio"])
    empty = os.path.join(out_dir, "empty.csv")
    open(empty, "w").close()
    with pytest.raises(InvalidArgumentError):
        read_csv(empty)


def test_grid_function_csv(out_dir, rng):
    f = random_band_limited(make_grid(64), rng)
    path = write_csv(grid_function_frame(f), os.path.join(out_dir, "f.csv"))
    loaded = read_grid_function(path)
    assert loaded.n_points == 64
    assert np.array_equal(loaded.values, f.values)


def test_grid_function_csv_rejects_wrong_theta(out_dir):
    frame = pd.DataFrame({"theta": np.linspace(0, 1, 8), "re": np.ones(8), "im": np.zeros(8)})
    path = write_csv(frame, os.path.join(out_dir, "bad.csv"))
    with pytest.raises(InvalidArgumentError):
        read_grid_function(path)


def test_object_frames():
    seq = make_sequence(constants.KIND_A_R, r=0.75)
    assert sequence_frame(seq).columns.tolist() == constants.SEQUENCE_COLUMNS
    frame = basis_frame(build_basis(seq, make_grid(256)))
    assert frame.columns.tolist() == constants.BASIS_COLUMNS
    assert len(frame) == 4 * 256


def test_jsonl(out_dir):
    path = write_jsonl([{"b": 1, "a": 2}, {"k": 0}], os.path.join(out_dir, "x.jsonl"))
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    assert lines == ['{"a": 2, "b": 1}', '{"k": 0}']


def test_config_file(tmp_path):
    path = tmp_path / "mtkit.env"
    path.write_text("GRID=2048\nk-min=5\n# comentario\nseed = 9\n")
    assert read_config_file(str(path)) == {"grid": "2048", "k_min": "5", "seed": "9"}
    with pytest.raises(InvalidArgumentError):
        read_config_file(str(tmp_path / "none.env"))


def test_calibrate_and_check(tmp_path):
    path = str(tmp_path / "constants.json")
    summary = {"C_D": 2.0, "band": 1.5, "slope": math.nan}
    calibration.calibrate("lacunary", summary, path)
    with open(path, encoding="utf-8") as handle:
        stored = json.load(handle)
    assert stored == {"lacunary": {"C_D": 2.0, "band": 1.5}}

    ratios = calibration.check("lacunary", {"C_D": 3.0, "band": 1.5}, path)
    assert ratios == {"C_D": 1.5, "band": 1.0}
    with pytest.raises(CalibrationDriftError):
        calibration.check("lacunary", {"C_D": 5.0, "band": 1.5}, path)
    with pytest.raises(InvalidArgumentError):
        calibration.check("thm1", summary, path)


def test_calibration_keeps_other_experiments(tmp_path):
    path = str(tmp_path / "constants.json")
    calibration.calibrate("thm1", {"band": 1.2}, path)
    calibration.calibrate("model", {"deviation_max": 1e-9}, path)
    assert set(calibration.load_constants(path)) == {"thm1", "model"}


def test_plot_is_deterministic(out_dir):
    frame = pd.DataFrame({"m": [1, 2, 3], "D_minus_n": [0.5, 1.2, 2.5], "psi2_max": [1.0, 4.0, 9.0]})
    csv_path = write_csv(frame, os.path.join(out_dir, "lacunary.csv"))
    first = emit_plot(csv_path, DEFAULT_PLOTS[constants.EXP_LACUNARY])
    assert first == os.path.join(out_dir, "lacunary.svg")
    content = read_bytes(first)
    second = emit_plot(csv_path, DEFAULT_PLOTS[constants.EXP_LACUNARY], os.path.join(out_dir, "copy.svg"))
    assert read_bytes(second) == content
    assert b"<svg" in content


def test_plot_errors(out_dir):
    csv_path = write_csv(pd.DataFrame({"k": [1, 2]}), os.path.join(out_dir, "k.csv"))
    with pytest.raises(InvalidArgumentError):
        emit_plot(csv_path, PlotSpec(x="k", y=["ratio"]))
    empty = write_csv(pd.DataFrame({"k": [], "ratio": []}), os.path.join(out_dir, "empty.csv"))
    with pytest.raises(InvalidArgumentError):
        emit_plot(empty, PlotSpec(x="k", y=["ratio"]))


def test_failed_plot_closes_its_figure(out_dir):
    frame = pd.DataFrame({"k": [1, 2, 3], "ratio": [1.0, 1.5, 2.0]})
    csv_path = write_csv(frame, os.path.join(out_dir, "ratio.csv"))
    before = len(plt.get_fignums())
    # el destino es un directorio: savefig falla
    with pytest.raises(OSError):
        emit_plot(csv_path, PlotSpec(x="k", y=["ratio"]), out_dir)
    assert len(plt.get_fignums()) == before
