"""
Línea de comandos de mtkit
basis, ortho, maximal, unwind, probe y exp <experimento>; los errores se traducen a códigos de salida
"""
import json
import logging
import os
from typing import Optional

import click
import numpy as np
from pydantic import ValidationError

from mtkit import __version__
from mtkit.config import settings, constants, setup_logging
from mtkit.exceptions import InvalidArgumentError, MTKitError
from mtkit.models.experiment import DEFAULT_PLOTS, ExperimentConfig, PlotSpec
from mtkit.models.unwinding import PolynomialH2
from mtkit.services import calibration
from mtkit.services.circle import make_grid, random_band_limited
from mtkit.services.experiments import run_experiment
from mtkit.services.io import (
    basis_frame,
    expansion_frame,
    grid_function_frame,
    level_frame,
    read_config_file,
    read_grid_function,
    sequence_frame,
    write_csv,
    write_jsonl
)
from mtkit.services.mt_system import (
    build_basis,
    even_index_sum,
    expand,
    make_sequence,
    maximal_partial_sum,
    orthonormality_deviation,
    required_grid_size
)
from mtkit.services.plotting import emit_plot
from mtkit.services.unwinding import (
    bessel_gap,
    energy_defects,
    expansion_error,
    random_polynomial,
    telescoping_errors,
    unwind as unwind_polynomial,
    unwind_to_mt
)

logger = logging.getLogger(__name__)


# Valores por omisión de cada experimento (los flags explícitos los reemplazan)
EXPERIMENT_DEFAULTS = {
    constants.EXP_THM1: {"k_min": 4, "k_max": 9, "trials": 4},
    constants.EXP_COUNTEREXAMPLE: {"k_min": 5, "k_max": 9},
    constants.EXP_LACUNARY: {"m_max": 14},
    constants.EXP_COROLLARY_B: {"m_max": 8, "trials": 4},
    constants.EXP_TTSTAR: {"k_min": 4, "k_max": 4, "trials": 100},
    constants.EXP_MODEL: {"trials": 4},
    constants.EXP_PROBE: {"k_min": 8, "k_max": 10, "trials": 4}
}


class MTKitGroup(click.Group):
    """Grupo que traduce los errores de mtkit a códigos de salida"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except MTKitError as exc:
            logger.error(f"{type(exc).__name__}: {exc.message}")
            click.echo(f"error: {exc.message}", err=True)
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            logger.error(f"Argumento inválido: {exc.error_count()} errores")
            click.echo(f"error: {exc}", err=True)
            ctx.exit(constants.EXIT_INVALID_ARGUMENT)


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=float))


def _out_dir(out: Optional[str]) -> str:
    path = settings.output_dir if out is None else out
    os.makedirs(path, exist_ok=True)
    return path


def _build_sequence(kind: str, r: Optional[float], length: Optional[int], extended: bool = False):
    return make_sequence(kind, r=r, length=length, extended=extended)


def _config_default_map(path: str) -> dict:
    """Las mismas claves para todos los subcomandos, incluidos los de exp"""
    values = read_config_file(path)
    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    default_map = {name: dict(values) for name in ("basis", "ortho", "maximal", "unwind", "probe")}
    default_map["exp"] = {name: dict(values) for name in [*EXPERIMENT_DEFAULTS, "plot"]}
    return default_map


sequence_options = [
    click.option("--kind", type=click.Choice([constants.KIND_A_R, constants.KIND_B, constants.KIND_D_R]),
                  default=constants.KIND_A_R, show_default=True, help="Familia de la sucesión"),
    click.option("--r", "r", type=float, default=None, help="Radio para a_r y d_r"),
    click.option("--k", "k", type=int, default=None, help="r = 1 − 2^{−k} (alternativa a --r)"),
    click.option("--length", type=int, default=None, help="Truncamiento de b"),
    click.option("--grid", type=int, default=None, help="Puntos de la malla (potencia de dos)"),
    click.option("--unsafe", is_flag=True, default=False, help="Omitir la guarda de resolución")
]

# Comunes a basis, ortho, maximal y unwind
common_options = [
    click.option("--seed", type=int, default=None, help="Semilla de las funciones de prueba aleatorias"),
    click.option("--out", type=click.Path(file_okay=False), default=None),
    click.option("--calibrate", is_flag=True, default=False, help="Congelar los valores numéricos del reporte"),
    click.option("--constants", "constants_path", type=click.Path(dir_okay=False), default=None,
                 help="Archivo de constantes (por omisión el de la configuración)")
]


def with_options(options):
    def decorator(function):
        for option in reversed(options):
            function = option(function)
        return function
    return decorator


def _radius(r: Optional[float], k: Optional[int]) -> Optional[float]:
    if r is not None and k is not None:
        raise InvalidArgumentError("give either --r or --k, not both")
    return 1.0 - 2.0 ** (-k) if k is not None else r


def _grid_for(seq, grid: Optional[int]):
    return make_grid(grid if grid is not None else max(settings.default_grid, required_grid_size(seq)))


def _emit_report(name: str, report: dict, calibrate: bool, constants_path: Optional[str]) -> dict:
    if calibrate:
        summary = {
            key: value for key, value in report.items()
            if isinstance(value, (int, float)) and not isinstance(value, bool)
        }
        report["constants"] = calibration.calibrate(name, summary, constants_path)
    _echo_json(report)
    return report


# ============= GRUPO PRINCIPAL =============

@click.group(cls=MTKitGroup)
@click.version_option(__version__, prog_name="mtkit")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Archivo key=value con valores por omisión; los flags lo reemplazan")
@click.pass_context
def cli(ctx, config_path):
    """Sistemas de Malmquist-Takenaka: bases, operadores maximales, desenrollado y experimentos"""
    setup_logging()
    if config_path is not None:
        ctx.default_map = _config_default_map(config_path)


@cli.command()
@with_options(sequence_options)
@click.option("--extended", is_flag=True, default=False, help="a_r con índices desde −K")
@click.option("--input", "input_path", type=click.Path(dir_okay=False), default=None,
              help="CSV theta,re,im para volcar sus coeficientes")
@with_options(common_options)
def basis(kind, r, k, length, grid, unsafe, extended, input_path, seed, out, calibrate, constants_path):
    """Volcar la sucesión, la base φ_n y opcionalmente los coeficientes de una función"""
    seq = _build_sequence(kind, _radius(r, k), length, extended)
    circle = _grid_for(seq, grid)
    mt_basis = build_basis(seq, circle, unsafe=unsafe)
    out = _out_dir(out)
    write_csv(sequence_frame(seq), os.path.join(out, "sequence.csv"))
    write_csv(basis_frame(mt_basis), os.path.join(out, "basis.csv"))
    if input_path is not None:
        f = read_grid_function(input_path)
        write_csv(expansion_frame(expand(f, mt_basis)), os.path.join(out, "expansion.csv"))
    _emit_report("basis", {"kind": seq.kind, "length": seq.length, "grid": circle.n_points},
                 calibrate, constants_path)


@cli.command()
@with_options(sequence_options)
@with_options(common_options)
def ortho(kind, r, k, length, grid, unsafe, seed, out, calibrate, constants_path):
    """Desviación máxima de la matriz de Gram respecto de la identidad"""
    seq = _build_sequence(kind, _radius(r, k), length)
    circle = _grid_for(seq, grid)
    mt_basis = build_basis(seq, circle, unsafe=unsafe)
    report = {
        "n_functions": mt_basis.size,
        "grid": circle.n_points,
        "required_grid": required_grid_size(seq),
        "max_deviation": orthonormality_deviation(mt_basis)
    }
    if out is not None:
        write_jsonl([report], os.path.join(_out_dir(out), "ortho.jsonl"))
    _emit_report("ortho", report, calibrate, constants_path)


@cli.command()
@with_options(sequence_options)
@click.option("--input", "input_path", type=click.Path(dir_okay=False), default=None,
              help="CSV theta,re,im; la malla sale del número de filas")
@click.option("--test", "test_function", type=click.Choice(["adversary", "random", "phi0"]),
              default="adversary", show_default=True, help="Función de prueba si no hay --input")
@with_options(common_options)
def maximal(kind, r, k, length, grid, unsafe, input_path, test_function, seed, out, calibrate, constants_path):
    """sup_n |S_n f| y la función de nivel donde se alcanza"""
    seq = _build_sequence(kind, _radius(r, k), length)
    if input_path is not None:
        f = read_grid_function(input_path)
        mt_basis = build_basis(seq, f.grid, unsafe=unsafe)
    else:
        mt_basis = build_basis(seq, _grid_for(seq, grid), unsafe=unsafe)
        if test_function == "adversary":
            f = even_index_sum(mt_basis)
        elif test_function == "phi0":
            f = mt_basis.function(mt_basis.first_index)
        else:
            rng = np.random.default_rng(settings.default_seed if seed is None else seed)
            f = random_band_limited(mt_basis.grid, rng, bandwidth=seq.length, kind="analytic")

    result = maximal_partial_sum(f, mt_basis)
    out = _out_dir(out)
    write_csv(grid_function_frame(result.values), os.path.join(out, "maximal.csv"))
    write_csv(level_frame(result.levels), os.path.join(out, "levels.csv"))
    norm = f.norm()
    _emit_report("maximal", {
        "grid": mt_basis.grid.n_points,
        "f_norm": norm,
        "maximal_norm": result.values.norm(),
        "ratio": result.values.norm() / norm if norm else 0.0
    }, calibrate, constants_path)


@cli.command()
@click.option("--coefficients", type=str, default=None,
              help="c_0,c_1,… (admite complejos como 1+2j)")
@click.option("--degree", type=int, default=8, show_default=True, help="Grado del polinomio aleatorio")
@click.option("--steps", type=int, default=10, show_default=True)
@click.option("--grid", type=int, default=None, help="Malla para la comparación MT")
@click.option("--compare/--no-compare", default=True, show_default=True)
@with_options(common_options)
def unwind(coefficients, degree, steps, grid, compare, seed, out, calibrate, constants_path):
    """Desenrollado de fase F_n = (F_{n−1} − F_{n−1}(0))/B_n y comparación con la serie MT"""
    if coefficients is not None:
        try:
            values = [complex(token.strip().replace(" ", "")) for token in coefficients.split(",")]
        except ValueError as exc:
            raise InvalidArgumentError(f"cannot parse coefficients {coefficients!r}") from exc
        F = PolynomialH2(coefficients=values)
    else:
        rng = np.random.default_rng(settings.default_seed if seed is None else seed)
        F = random_polynomial(rng, degree)

    result = unwind_polynomial(F, steps)
    out = _out_dir(out)
    write_jsonl([step.record() for step in result.steps], os.path.join(out, "unwind.jsonl"))

    report = {
        "steps": len(result.steps),
        "terminated": result.terminated,
        "telescoping_error": max(telescoping_errors(result)),
        "expansion_error": expansion_error(result),
        "energy_defect": max(energy_defects(result), default=0.0),
        "bessel_gap": bessel_gap(result)
    }
    if compare:
        comparison = unwind_to_mt(result, make_grid(settings.default_grid if grid is None else grid))
        report.update({
            "mt_boundaries": comparison.boundaries,
            "mt_max_discrepancy": comparison.max_discrepancy,
            "mt_resolved": comparison.resolved
        })
    _emit_report("unwind", report, calibrate, constants_path)


# ============= EXPERIMENTOS =============

experiment_options = [
    click.option("--k-min", type=int, default=None),
    click.option("--k-max", type=int, default=None),
    click.option("--grid", type=int, default=None),
    click.option("--trials", type=int, default=None),
    click.option("--seed", type=int, default=None),
    click.option("--m-max", type=int, default=None),
    click.option("--lambda", "lam", type=int, default=None, help="Dilatación Λ de la sonda"),
    click.option("--support-size", type=int, default=None, help="Soporte del caso modelo"),
    click.option("--n-jobs", type=int, default=None, help="Procesos de joblib"),
    click.option("--unsafe", is_flag=True, default=False),
    click.option("--out", type=click.Path(file_okay=False), default=None),
    click.option("--calibrate", is_flag=True, default=False, help="Congelar las constantes resumen"),
    click.option("--check", is_flag=True, default=False, help="Verificar contra las constantes congeladas"),
    click.option("--constants", "constants_path", type=click.Path(dir_okay=False), default=None,
                 help="Archivo de constantes (por omisión el de la configuración)")
]


def _experiment_config(name: str, **options) -> ExperimentConfig:
    values = dict(EXPERIMENT_DEFAULTS[name])
    values.update({key: value for key, value in options.items() if value is not None})
    if values.get("unsafe") is False:
        values.pop("unsafe")
    return ExperimentConfig(name=name, **values)


def run_and_emit(name: str, out, calibrate, check, constants_path, **options) -> dict:
    """Corre el experimento, escribe <out>/<name>.csv y aplica calibrar/verificar"""
    if calibrate and check:
        raise InvalidArgumentError("--calibrate and --check are mutually exclusive")
    cfg = _experiment_config(name, **options)
    result = run_experiment(cfg)
    csv_path = write_csv(result.frame, os.path.join(_out_dir(out), f"{name}.csv"))

    report = {"experiment": name, "csv": csv_path, "summary": result.summary}
    if calibrate:
        report["constants"] = calibration.calibrate(name, result.summary, constants_path)
    if check:
        report["ratios"] = calibration.check(name, result.summary, constants_path)
    _echo_json(report)
    return report


@cli.command()
@with_options(experiment_options)
def probe(k_min, k_max, grid, trials, seed, m_max, lam, support_size, n_jobs, unsafe, out,
          calibrate, check, constants_path):
    """Comprobaciones de τ/η y Σ/‖g‖² sobre pares admisibles (CSV trial,r,lambda,…)"""
    run_and_emit(
        constants.EXP_PROBE, out, calibrate, check, constants_path,
        k_min=k_min, k_max=k_max, grid=grid, trials=trials, seed=seed, m_max=m_max,
        lam=lam, support_size=support_size, n_jobs=n_jobs, unsafe=unsafe
    )


@cli.group(cls=MTKitGroup)
def exp():
    """Experimentos numéricos deterministas"""


def _make_experiment_command(name: str):
    @with_options(experiment_options)
    def command(k_min, k_max, grid, trials, seed, m_max, lam, support_size, n_jobs, unsafe, out,
                calibrate, check, constants_path):
        run_and_emit(
            name, out, calibrate, check, constants_path,
            k_min=k_min, k_max=k_max, grid=grid, trials=trials, seed=seed, m_max=m_max,
            lam=lam, support_size=support_size, n_jobs=n_jobs, unsafe=unsafe
        )

    command.__doc__ = f"Experimento {name}: escribe {name}.csv"
    return exp.command(name=name)(command)


for _name in EXPERIMENT_DEFAULTS:
    if _name != constants.EXP_PROBE:
        _make_experiment_command(_name)


@exp.command(name="plot")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--experiment", type=click.Choice(constants.EXPERIMENTS), default=None,
              help="Usar la gráfica por omisión del experimento")
@click.option("--x", "x_column", type=str, default=None)
@click.option("--y", "y_columns", type=str, multiple=True)
@click.option("--kind", type=click.Choice(["line", "scatter"]), default="line")
@click.option("--logy", is_flag=True, default=False)
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None)
def plot(csv_path, experiment, x_column, y_columns, kind, logy, svg_path):
    """SVG determinista a partir de un CSV de experimento"""
    if experiment is not None:
        spec = DEFAULT_PLOTS[experiment]
    else:
        if x_column is None or not y_columns:
            raise InvalidArgumentError("give --experiment or both --x and --y")
        spec = PlotSpec(x=x_column, y=list(y_columns), kind=kind, logy=logy)
    _echo_json({"svg": emit_plot(csv_path, spec, svg_path)})


def main():
    cli(prog_name="mtkit")


if __name__ == "__main__":
    main()
