import filecmp
import json
import os

import pandas as pd
import pytest
from click.testing import CliRunner

from mtkit import __version__
from mtkit.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def payload(result):
    return json.loads(result.stdout)


def test_version(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_ortho(runner):
    result = invoke(runner, "ortho", "--k", "4")
    assert result.exit_code == 0
    report = payload(result)
    assert report["n_functions"] == 16
    assert report["max_deviation"] < 1e-10


def test_basis_writes_csv_files(runner, out_dir):
    result = invoke(runner, "basis", "--r", "0.75", "--out", out_dir)
    assert result.exit_code == 0
    assert payload(result)["length"] == 4
    sequence = pd.read_csv(os.path.join(out_dir, "sequence.csv"))
    basis = pd.read_csv(os.path.join(out_dir, "basis.csv"))
    assert len(sequence) == 4
    assert len(basis) == 4 * payload(result)["grid"]


def test_maximal_phi0(runner, out_dir):
    result = invoke(runner, "maximal", "--k", "4", "--test", "phi0", "--out", out_dir)
    assert result.exit_code == 0
    assert payload(result)["ratio"] >= 1.0 - 1e-9
    assert os.path.exists(os.path.join(out_dir, "maximal.csv"))
    assert os.path.exists(os.path.join(out_dir, "levels.csv"))


def test_unwind_example(runner, out_dir):
    result = invoke(runner, "unwind", "--coefficients", "1,1,-2.5,1", "--out", out_dir)
    assert result.exit_code == 0
    report = payload(result)
    assert report["steps"] == 4
    assert report["terminated"]
    assert report["mt_resolved"]
    with open(os.path.join(out_dir, "unwind.jsonl"), encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    assert len(lines) == 4
    assert json.loads(lines[0])["k"] == 0


@pytest.mark.parametrize("args", [
    ["ortho", "--r", "1.5"],
    ["ortho", "--k", "4", "--grid", "1000"],
    ["ortho", "--k", "4", "--grid", "256"],
    ["ortho", "--r", "0.9", "--k", "4"],
    ["unwind", "--coefficients", "1,abc"],
    ["exp", "thm1", "--grid", "1000"]
])
def test_invalid_arguments_exit_2(runner, out_dir, args):
    result = invoke(runner, *args, "--out", out_dir) if args[0] != "ortho" else invoke(runner, *args)
    assert result.exit_code == 2
    assert "error:" in result.stderr


def test_coarse_grid_runs_with_unsafe(runner):
    result = invoke(runner, "ortho", "--k", "4", "--grid", "256", "--unsafe")
    assert result.exit_code == 0


def test_feasibility_guard_exit_3(runner, out_dir):
    result = invoke(runner, "exp", "thm1", "--k-max", "11", "--out", out_dir)
    assert result.exit_code == 3


def test_calibrate_and_check_are_exclusive(runner, out_dir):
    result = invoke(runner, "exp", "lacunary", "--m-max", "3", "--out", out_dir, "--calibrate", "--check")
    assert result.exit_code == 2


def test_lacunary_calibration_cycle(runner, out_dir):
    constants_path = os.path.join(out_dir, "constants.json")
    base = ["exp", "lacunary", "--m-max", "3", "--grid", "128", "--out", out_dir, "--constants", constants_path]

    result = invoke(runner, *base, "--calibrate")
    assert result.exit_code == 0
    assert len(pd.read_csv(os.path.join(out_dir, "lacunary.csv"))) == 3

    result = invoke(runner, *base, "--check")
    assert result.exit_code == 0
    assert all(ratio == pytest.approx(1.0) for ratio in payload(result)["ratios"].values())

    with open(constants_path, encoding="utf-8") as handle:
        stored = json.load(handle)
    stored["lacunary"]["C_D"] *= 3.0
    with open(constants_path, "w", encoding="utf-8") as handle:
        json.dump(stored, handle)
    result = invoke(runner, *base, "--check")
    assert result.exit_code == 4


def test_check_without_calibration(runner, out_dir):
    constants_path = os.path.join(out_dir, "none.json")
    result = invoke(runner, "exp", "lacunary", "--m-max", "2", "--grid", "128", "--out", out_dir,
                    "--constants", constants_path, "--check")
    assert result.exit_code == 2


def test_plot_command(runner, out_dir):
    invoke(runner, "exp", "lacunary", "--m-max", "3", "--grid", "128", "--out", out_dir)
    csv_path = os.path.join(out_dir, "lacunary.csv")
    result = invoke(runner, "exp", "plot", csv_path, "--experiment", "lacunary")
    assert result.exit_code == 0
    assert os.path.exists(payload(result)["svg"])

    result = invoke(runner, "exp", "plot", csv_path, "--x", "m", "--y", "D_over_n",
                    "--svg", os.path.join(out_dir, "ratio.svg"))
    assert result.exit_code == 0
    assert invoke(runner, "exp", "plot", csv_path).exit_code == 2


def test_config_file_supplies_defaults(runner, out_dir, tmp_path):
    config_path = tmp_path / "mtkit.env"
    config_path.write_text("grid=128\nm-max=2\n")
    result = invoke(runner, "--config", str(config_path), "exp", "lacunary", "--out", out_dir)
    assert result.exit_code == 0
    frame = pd.read_csv(os.path.join(out_dir, "lacunary.csv"))
    assert frame["m"].tolist() == [1, 2]

    # los flags explícitos ganan
    result = invoke(runner, "--config", str(config_path), "exp", "lacunary", "--m-max", "3", "--out", out_dir)
    assert result.exit_code == 0
    assert len(pd.read_csv(os.path.join(out_dir, "lacunary.csv"))) == 3


def test_experiment_csv_is_reproducible(runner, tmp_path):
    paths = []
    for name in ("first", "second"):
        out = str(tmp_path / name)
        result = invoke(runner, "exp", "thm1", "--k-min", "4", "--k-max", "5", "--trials", "1",
                        "--seed", "7", "--out", out)
        assert result.exit_code == 0
        paths.append(os.path.join(out, "thm1.csv"))
    assert filecmp.cmp(paths[0], paths[1], shallow=False)


def test_common_options_on_sequence_commands(runner, out_dir):
    constants_path = os.path.join(out_dir, "constants.json")
    result = invoke(runner, "ortho", "--k", "4", "--out", out_dir, "--calibrate", "--constants", constants_path)
    assert result.exit_code == 0
    assert payload(result)["constants"] == constants_path
    assert os.path.exists(os.path.join(out_dir, "ortho.jsonl"))

    result = invoke(runner, "basis", "--r", "0.75", "--seed", "3", "--out", out_dir,
                    "--calibrate", "--constants", constants_path)
    assert result.exit_code == 0

    with open(constants_path, encoding="utf-8") as handle:
        stored = json.load(handle)
    assert stored["ortho"]["n_functions"] == 16.0
    assert stored["basis"]["length"] == 4.0
    assert "kind" not in stored["basis"]


def test_maximal_random_test_function_follows_seed(runner, out_dir):
    args = ["maximal", "--k", "4", "--test", "random", "--seed", "11", "--out", out_dir]
    first = payload(invoke(runner, *args))
    second = payload(invoke(runner, *args))
    assert first["ratio"] == second["ratio"]
