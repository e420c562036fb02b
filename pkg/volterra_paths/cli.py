"""Command-line interface for the stochastic Volterra toolkit."""

import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from volterra_paths import __version__
from volterra_paths.config import (
    ExperimentConfig,
    LoggingSettings,
    Settings,
    configure_settings,
    get_settings,
    load_experiment_config,
)
from volterra_paths.core.exceptions import ConfigError, VolterraError
from volterra_paths.core.workflow import ExperimentWorkflow, WorkflowResult, aggregate_reports
from volterra_paths.utils.logging import configure_from

console = Console()

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def print_result(result: WorkflowResult, title: str) -> None:
    """Print check outcomes and notices."""
    status = "[green]PASSED[/green]" if result.success else "[red]FAILED[/red]"

    table = Table(title=title, show_header=True)
    table.add_column("Check", style="cyan")
    table.add_column("Result", style="white")
    for name, passed in result.checks.items():
        table.add_row(name, "[green]ok[/green]" if passed else "[red]failed[/red]")
    table.add_row("Status", status)
    console.print(table)

    for notice in result.notices:
        console.print(f"[yellow]Notice:[/yellow] {notice}")
    if result.errors:
        console.print("\n[red]Errors:[/red]")
        for error in result.errors:
            console.print(f"  -{error}")


def _load(config_path: str, seed: int | None) -> ExperimentConfig:
    config = load_experiment_config(Path(config_path))
    if seed is None:
        return config
    try:
        return ExperimentConfig.model_validate({**config.model_dump(), "seed": seed})
    except ValidationError as e:
        raise ConfigError("Seed override does not match the schema", config_path, str(e)) from e


def _run(
    step: Callable[[ExperimentWorkflow], Any],
    title: str,
    config_path: str,
    out: str | None,
    seed: int | None,
    force: bool,
    threads: int | None,
) -> None:
    try:
        config = _load(config_path, seed)
    except ConfigError as e:
        console.print(f"[red]Config error:[/red] {e}")
        sys.exit(EXIT_USAGE)

    try:
        workflow = ExperimentWorkflow(
            config,
            output_dir=Path(out) if out else None,
            settings=get_settings(),
            force=force,
            threads=threads,
        )
        with console.status(f"{title}..."):
            step(workflow)
    except ConfigError as e:
        console.print(f"[red]Config error:[/red] {e}")
        sys.exit(EXIT_USAGE)
    except VolterraError as e:
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_CHECK_FAILED)

    print_result(workflow.result, title)
    console.print(f"Reports written to {workflow.output_dir}")
    sys.exit(EXIT_OK if workflow.result.success else EXIT_CHECK_FAILED)


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by the experiment subcommands."""
    options = [
        click.option("--config", "config_path", required=True, type=click.Path(), help="Experiment config JSON"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory"),
        click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the config seed"),
        click.option("--force", is_flag=True, help="Continue when the kernel certificate fails"),
        click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def main(verbose: bool) -> None:
    """Kernel certification, resolvents and stochastic paths for Volterra equations."""
    if verbose:
        settings = Settings.from_env()
        settings = settings.model_copy(update={"logging": LoggingSettings(level="DEBUG")})
        configure_settings(settings)
    configure_from(get_settings().logging)


@main.command("verify-kernel")
@experiment_options
def verify_kernel(config_path: str, out: str | None, seed: int | None, force: bool, threads: int | None) -> None:
    """Certify the kernel's sector and regularity conditions."""
    _run(lambda wf: wf.certify(), "Kernel certificate", config_path, out, seed, force, threads)


@main.command()
@experiment_options
def resolvent(config_path: str, out: str | None, seed: int | None, force: bool, threads: int | None) -> None:
    """Build resolvent tables by both methods and compare them."""

    def step(wf: ExperimentWorkflow) -> None:
        wf.certify()
        wf.build_resolvents()

    _run(step, "Resolvent", config_path, out, seed, force, threads)


@main.command("check-positivity")
@experiment_options
def check_positivity(config_path: str, out: str | None, seed: int | None, force: bool, threads: int | None) -> None:
    """Gram and Bochner positive-definiteness checks."""

    def step(wf: ExperimentWorkflow) -> None:
        wf.certify()
        wf.check_positivity()

    _run(step, "Positivity", config_path, out, seed, force, threads)


@main.command()
@experiment_options
def simulate(config_path: str, out: str | None, seed: int | None, force: bool, threads: int | None) -> None:
    """Simulate noise paths, solve, and run path diagnostics."""

    def step(wf: ExperimentWorkflow) -> None:
        wf.certify()
        wf.simulate()

    _run(step, "Simulation", config_path, out, seed, force, threads)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Experiment config JSON")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory")
def report(config_path: str | None, out: str | None) -> None:
    """Aggregate the reports of an output directory into summary.json."""
    output_dir: Path
    if out:
        output_dir = Path(out)
    elif config_path:
        try:
            config = _load(config_path, None)
        except ConfigError as e:
            console.print(f"[red]Config error:[/red] {e}")
            sys.exit(EXIT_USAGE)
        output_dir = config.output_dir or get_settings().runtime.output_dir
    else:
        output_dir = get_settings().runtime.output_dir

    result = WorkflowResult()
    summary = aggregate_reports(output_dir, result)

    table = Table(title=f"Reports in {output_dir}", show_header=True)
    table.add_column("Report", style="cyan")
    table.add_column("File", style="white")
    table.add_column("Result", style="white")
    for name, entry in summary["reports"].items():
        table.add_row(name, entry["file"], "[green]ok[/green]" if entry["passed"] else "[red]failed[/red]")
    console.print(table)

    if result.errors:
        for error in result.errors:
            console.print(f"[red]{error}[/red]")
    sys.exit(EXIT_OK if result.success else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
