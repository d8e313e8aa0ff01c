"""Command-line front end: studies, theory curves, mollified-basis dumps and self-checks."""
import logging
import sys
from typing import List, Optional, Sequence

import click
import pandas as pd

from mollifem.config import lambda_range, parse_config
from mollifem.errors import (IO_EXIT_CODE, MollifemError, UnknownFamily, UnknownKernel, ValidationError,
                             VerificationFailure)
from mollifem.kernel import BUILTIN_KERNELS, convolve_basis
from mollifem.mesh_fe import Family, build_basis
from mollifem.rates import run_study
from mollifem.report import FORMATS, emit
from mollifem.theory import theory_curves
from mollifem.verify import CHECKS, run_checks

logger = logging.getLogger("mollifem")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _split(value: Optional[str], cast) -> Optional[List]:
    if value is None:
        return None
    try:
        return [cast(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"not a comma-separated list: {value!r}") from exc


def _floats(ctx, param, value):
    return _split(value, float)


def _ints(ctx, param, value):
    return _split(value, int)


output_options = [
    click.option("--output", "output", default=None, help="Output file; standard output if omitted."),
    click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True),
]


def with_output(fn):
    for option in reversed(output_options):
        fn = option(fn)
    return fn


@click.group()
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default="WARNING",
              show_default=True)
def cli(log_level: str):
    """Finite-element reconstruction of noisy samples, with and without mollification."""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="TOML config file.")
@click.option("--family", default=None, help="P1 or P2.")
@click.option("--kernel", default=None, help="K, H or none.")
@click.option("--lambda-grid", callback=_floats, default=None, help="Comma-separated noise exponents.")
@click.option("--n-values", callback=_ints, default=None, help="Comma-separated node counts.")
@click.option("--draws", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--simpson-m", type=int, default=None)
@click.option("--workers", type=int, default=None)
@with_output
def study(config_path, family, kernel, lambda_grid, n_values, draws, seed, simpson_m, workers, output, fmt):
    """Measured vs predicted convergence rates over a lambda sweep."""
    config = parse_config(config_path, {
        "family": family, "kernel": kernel, "lambda_grid": lambda_grid, "n_values": n_values,
        "draws": draws, "seed": seed, "simpson_m": simpson_m, "workers": workers,
    })
    logger.info("study config: %s", config.echo())
    return emit(run_study(config), fmt, output)


@cli.command()
@click.option("--s-a", "s_a", type=int, required=True, help="Approximation order of the FE space.")
@click.option("--s-r", "s_r", type=int, required=True, help="Order of the kernel.")
@click.option("--d", "d", type=int, default=1, show_default=True)
@click.option("--lambda-grid", callback=_floats, default=None, help="Comma-separated noise exponents.")
@with_output
def curves(s_a, s_r, d, lambda_grid, output, fmt):
    """Predicted rates with and without regularisation."""
    if s_a < 1 or s_r < 1 or d < 1:
        raise ValidationError("orders and dimension must be positive")
    lambdas = lambda_grid if lambda_grid is not None else lambda_range(0.0, 5.0, 0.25)
    return emit(theory_curves(s_a, s_r, d, lambdas), fmt, output)


@cli.command()
@click.option("--kernel", required=True, help="K or H.")
@click.option("--beta", type=float, required=True)
@click.option("--family", default="P1", show_default=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--index", type=int, required=True, help="0-based basis index.")
@with_output
def convolve(kernel, beta, family, n, index, output, fmt):
    """Dump (x, K_beta * phi_i(x)) at breakpoints and 10 interior points per piece."""
    if kernel not in BUILTIN_KERNELS:
        raise UnknownKernel(f"unknown kernel {kernel!r}, expected one of {', '.join(BUILTIN_KERNELS)}")
    if family not in {f.value for f in Family}:
        raise UnknownFamily(f"unknown family {family!r}, expected P1 or P2")
    if beta <= 0:
        raise ValidationError("beta must be positive")
    psi = convolve_basis(BUILTIN_KERNELS[kernel], beta, build_basis(Family(family), n), index)
    x = psi.sample(per_piece=10)
    return emit(pd.DataFrame({"x": x, "value": psi(x)}), fmt, output)


@cli.command()
@click.option("--module", "modules", multiple=True, type=click.Choice(list(CHECKS)),
              help="Restrict to one module; repeatable.")
def verify(modules):
    """Run the invariant checks, one line per check."""
    results = run_checks(modules or None)
    for result in results:
        click.echo(result.line())
    failed = [r for r in results if not r.passed]
    if failed:
        raise VerificationFailure(f"{len(failed)} of {len(results)} checks failed")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        status = cli.main(args=list(argv) if argv is not None else None,
                          prog_name="mollifem", standalone_mode=False)
    except MollifemError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return ValidationError.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return IO_EXIT_CODE
    return status if isinstance(status, int) else 0


if __name__ == "__main__":
    raise SystemExit(main())
