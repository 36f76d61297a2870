"""
Command line front end. Every command reads the same run options, given as flags or through an
option file with a [run] section, and writes its artifacts into `--out`.
"""
import functools
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from degenspec import artifacts, kernel, measure, optionfile, structs
from degenspec.constants import DEFAULTS, EXIT, METHOD
from degenspec.errors import Error, SpecError, StageError
from degenspec.kernel import oracle
from degenspec.pipeline import Pipeline, RunConfig, exit_status, load_report, split_list
from degenspec.version import __VERSION__


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def handle_errors(f):
    """exit 2 on unreadable input or bad options, 1 on any other failure"""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return f(*args, **kwargs)
        except StageError as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT.IO_FAILURE if isinstance(e.cause, OSError) else EXIT.DOMAIN_FAILURE)
        except (SpecError, OSError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT.IO_FAILURE)
        except Error as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT.DOMAIN_FAILURE)

    return wrapper


def run_options(f):
    options = [
        click.option(
            "--config",
            "config_file",
            type=click.Path(dir_okay=False),
            help="Option file whose [run] section supplies defaults for the flags.",
        ),
        click.option("--measure", type=click.Path(dir_okay=False), help="Measure spec JSON."),
        click.option("--kernel", type=click.Path(dir_okay=False), help="Kernel spec JSON."),
        click.option("--depth", type=int, help=f"Atom levels 0..J, default {DEFAULTS.DEPTH}."),
        click.option(
            "--precision-bits",
            type=int,
            help=f"Working precision, default {DEFAULTS.PRECISION_BITS}.",
        ),
        click.option("--eps", help="Comma separated ball radii as decimal strings."),
        click.option("--method", help=f"Comma separated methods out of {', '.join(METHOD.ALL)}."),
        click.option("--seed", type=int, help="Monte Carlo seed."),
        click.option("--samples", type=int, help="Monte Carlo sample count."),
        click.option("--workers", type=int, help="Monte Carlo threads."),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def load_config(config_file: Optional[str], **flags: Any) -> RunConfig:
    options: Dict[str, Any] = optionfile.read_run_options(config_file) if config_file else {}
    options.update({key: value for key, value in flags.items() if value is not None})
    return RunConfig.from_options(options)


def _number(value: Optional[float], spec: str = ".5f") -> str:
    return "-" if value is None else format(value, spec)


def render_report(report: Dict[str, Any], console: Console):
    slope = report["slope"]
    coefficient = report["coefficient"]
    table = Table(title="theory vs fit")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("slope theory", _number(slope["theory"]))
    table.add_row("q", _number(slope["q"], "g"))
    fitted = _number(slope["fitted"])
    if slope["stderr"] is not None:
        fitted += f" ± {slope['stderr']:.5f}"
    table.add_row("slope fitted", fitted)
    table.add_row("slope ratio", _number(slope["ratio"]))
    table.add_row("C theory", _number(coefficient["C"]))
    table.add_row("ln² coefficient", _number(coefficient["fitted"]))
    table.add_row("coefficient ratio", _number(coefficient["ratio"]))
    console.print(table)

    table = Table(title="small ball")
    for column in ("eps", "method", "ln P", "stderr"):
        table.add_column(column, justify="left" if column == "method" else "right")
    for row in report["smallball"]:
        log_prob = _number(row["log_prob"], ".6g")
        table.add_row(row["eps"], row["method"], log_prob, _number(row["stderr"], ".2g"))
    console.print(table)
    for error in report["errors"]:
        console.print(f"error in {error['stage']}: {error['error']}", markup=False)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__VERSION__, "-V", "--version")
@click.option("-v", "--verbose", is_flag=True, help="Log at debug level.")
def cli(verbose: bool):
    """Spectra and small ball probabilities of Gaussian processes in degenerate measures."""
    setup_logging(verbose)


@cli.command("validate")
@click.option("--config", "config_file", type=click.Path(dir_okay=False))
@click.option(
    "--measure", "measure_path", type=click.Path(dir_okay=False), help="Measure spec JSON."
)
@handle_errors
def cmd_validate(config_file: Optional[str], measure_path: Optional[str]):
    """Check that a measure spec defines a probability measure."""
    options = optionfile.read_run_options(config_file) if config_file else {}
    path = measure_path or options.get("measure")
    if path is None:
        raise ValueError("missing option: measure")
    report = measure.validate(measure.load_measure(path))
    if report.valid:
        click.echo("valid")
        return
    for violation in report.violations:
        click.echo(str(violation))
    click.get_current_context().exit(EXIT.DOMAIN_FAILURE)


@cli.command("atoms")
@run_options
@handle_errors
def cmd_atoms(config_file: Optional[str], **flags: Any):
    """Enumerate the atoms of the truncated measure."""
    pipeline = Pipeline(load_config(config_file, **flags))
    atom_list = pipeline.atoms()
    click.echo(f"{len(atom_list)} atoms in {pipeline.path(structs.ATOMS_FILE)}")


@cli.command("eigs")
@run_options
@handle_errors
def cmd_eigs(config_file: Optional[str], **flags: Any):
    """Eigenvalues of the Gram matrix, reused when the inputs are unchanged."""
    pipeline = Pipeline(load_config(config_file, **flags))
    sp = pipeline.eigs()
    click.echo(f"{len(sp)} eigenvalues in {pipeline.path(structs.EIGS_FILE)}")


@cli.command("slope")
@run_options
@handle_errors
def cmd_slope(config_file: Optional[str], **flags: Any):
    """Fit the counting function slope and compare it with (n - 1) / ln q."""
    pipeline = Pipeline(load_config(config_file, **flags))
    data = pipeline.slope(pipeline.eigs())
    click.echo(f"slope theory {data['theoretical_slope']:.5f}")
    if data["fit"] is not None:
        click.echo(f"slope fitted {data['fit']['slope']:.5f} ± {data['fit']['stderr']:.5f}")
    for error in pipeline.errors:
        click.echo(f"error in {error['stage']}: {error['error']}", err=True)
    click.get_current_context().exit(exit_status({"errors": pipeline.errors}))


@cli.command("smallball")
@run_options
@handle_errors
def cmd_smallball(config_file: Optional[str], **flags: Any):
    """Small ball log probabilities for every eps and method."""
    pipeline = Pipeline(load_config(config_file, **flags))
    rows = pipeline.smallball(pipeline.eigs())
    click.echo(f"{len(rows)} estimates in {pipeline.path(structs.SMALLBALL_FILE)}")
    for error in pipeline.errors:
        click.echo(f"error in {error['stage']} at eps {error['eps']}: {error['error']}", err=True)
    click.get_current_context().exit(exit_status({"errors": pipeline.errors}))


@cli.command("pipeline")
@run_options
@handle_errors
def cmd_pipeline(config_file: Optional[str], **flags: Any):
    """Run every stage and write report.json."""
    report = Pipeline(load_config(config_file, **flags)).run()
    render_report(report, Console())
    click.get_current_context().exit(exit_status(report))


@cli.command("report")
@click.option("--config", "config_file", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), help="Output directory of a run.")
@click.option(
    "--format", "format_", type=click.Choice(["text", "json"]), default="text", show_default=True
)
@handle_errors
def cmd_report(config_file: Optional[str], out: Optional[str], format_: str):
    """Render report.json without recomputing anything."""
    options = optionfile.read_run_options(config_file) if config_file else {}
    output_dir = Path(out or options.get("out") or "out")
    report = load_report(output_dir)
    if format_ == "json":
        click.echo((output_dir / structs.REPORT_FILE).read_text(encoding="utf-8"), nl=False)
    else:
        render_report(report, Console())


@cli.command("oracle")
@click.option("--kernel", "kernel_path", required=True, type=click.Path(dir_okay=False))
@click.option("--grid", default="0,0.25,0.5,0.75,1", show_default=True, help="Comma separated.")
@click.option("--samples", type=int, default=DEFAULTS.N_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=DEFAULTS.SEED, show_default=True)
@click.option("--workers", type=int, default=DEFAULTS.WORKERS, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@handle_errors
def cmd_oracle(kernel_path: str, grid: str, samples: int, seed: int, workers: int, out: str):
    """Monte Carlo covariance of a kernel's process on a grid."""
    k = kernel.load_kernel(kernel_path)
    points = [float(x) for x in split_list(grid)]
    cov = oracle.mc_covariance_oracle(k, points, samples, seed, workers)
    path = Path(out) / structs.COV_FILE
    artifacts.write_cov_csv(cov, path)
    click.echo(f"{len(points) ** 2} covariances in {path}")
