#!/usr/bin/env python3
"""
Relativistic Vlasov-Poisson simulator - command line entry point

    rvp run <config> [--out DIR] [--seed N] [--threads N]
    rvp verify <config> [--sweep] [--criterion NAME ...]
    rvp resume <checkpoint> [--out DIR] [--threads N]

Exit status: 0 on success, 1 when a verification criterion fails, 2 on any
simulator error (error.json is written to the run directory and stderr).
"""

import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Optional

import click
from dotenv import load_dotenv

# Load .env file at startup
env_path = Path('.') / '.env'
if env_path.exists():
    load_dotenv(env_path)

from harness import (
    Criterion,
    __version__,
    load_checkpoint,
    load_run_config,
    resume_simulation,
    run_simulation,
    verify as run_verification,
    write_error,
)
from kinetics.exceptions import RVPException
from utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_ERROR = 2
THREADS_ENV = "RVP_THREADS"


class _Invocation:
    """Output directory of the current command, once known"""
    directory: Optional[str] = None


@contextmanager
def reporting(command: str):
    """Map simulator errors to exit status 2 with a machine-readable error"""
    invocation = _Invocation()
    try:
        yield invocation
    except RVPException as e:
        path = write_error(invocation.directory, e)
        payload = {"command": command, **e.to_dict()}
        if path is not None:
            payload["error_file"] = str(path)
        click.echo(json.dumps(payload, sort_keys=True, default=str), err=True)
        sys.exit(EXIT_ERROR)


def _overrides(out: Optional[str] = None, seed: Optional[int] = None,
               threads: Optional[int] = None) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if out is not None:
        overrides["output"] = {"directory": out}
    if seed is not None:
        overrides["particles"] = {"seed": seed}
    if threads is not None:
        overrides["runtime"] = {"threads": threads}
    return overrides


out_option = click.option("--out", type=click.Path(file_okay=False), default=None,
                          help="Output directory (must not exist or be empty)")
threads_option = click.option("--threads", type=click.IntRange(min=1), default=None, envvar=THREADS_ENV,
                              help=f"Worker threads (also read from {THREADS_ENV})")


@click.group()
@click.version_option(__version__, prog_name="rvp")
def cli():
    """Particle simulator for the relativistic Vlasov-Poisson system"""


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@out_option
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Sampling seed")
@threads_option
def run(config_path: str, out: Optional[str], seed: Optional[int], threads: Optional[int]):
    """Integrate the configured scenario to t_end and write its artifacts"""
    with reporting("run") as invocation:
        config = load_run_config(config_path, _overrides(out, seed, threads))
        setup_logging(config.logging.model_dump())
        invocation.directory = config.output.directory
        result = run_simulation(config)
        click.echo(f"run complete: {result.directory} (config {result.config_hash[:12]})")


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@out_option
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Suite seed")
@threads_option
@click.option("--sweep", is_flag=True, help="Also emit the dt-halving convergence table")
@click.option("--criterion", "criteria", multiple=True, type=click.Choice([c.value for c in Criterion]),
              help="Run only these criteria (repeatable)")
def verify(config_path: str, out: Optional[str], seed: Optional[int], threads: Optional[int],
           sweep: bool, criteria: tuple):
    """Run the acceptance suites and write a pass/fail report per criterion"""
    with reporting("verify") as invocation:
        overrides = _overrides(out, None, threads)
        if seed is not None:
            overrides["verify"] = {"seed": seed}
        config = load_run_config(config_path, overrides)
        setup_logging(config.logging.model_dump())
        invocation.directory = config.output.directory
        report = run_verification(config, sweep=sweep, criteria=[Criterion(c) for c in criteria] or None)

    for result in report.results:
        click.echo(f"{result.criterion.value:<22} {'PASS' if result.passed else 'FAIL'}  ({result.seconds:.1f}s)")
    for row in report.sweep:
        click.echo(f"dt={row['dt']:<12.6g} energy drift {row['energy_drift']:.3e}  order {row['observed_order']:.3f}")
    if not report.passed:
        click.echo(f"verification failed: {', '.join(report.failures)}", err=True)
        sys.exit(EXIT_VERIFY_FAILED)


@cli.command()
@click.argument("checkpoint_path", type=click.Path(dir_okay=False))
@out_option
@threads_option
def resume(checkpoint_path: str, out: Optional[str], threads: Optional[int]):
    """Continue a checkpointed run to its t_end"""
    with reporting("resume") as invocation:
        checkpoint = load_checkpoint(checkpoint_path)
        directory = out or f"{checkpoint.config.output.directory}-resumed"
        setup_logging(checkpoint.config.logging.model_dump())
        invocation.directory = directory
        result = resume_simulation(checkpoint, _overrides(directory, None, threads))
        click.echo(f"resume complete: {result.directory} (config {result.config_hash[:12]})")


if __name__ == "__main__":
    cli()
