"""CLI entry point for hyperpoison."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from hyperpoison.core.config import ExperimentConfig, resolve_config
from hyperpoison.core.exceptions import (
    ConfigError,
    ConvergenceError,
    DatasetError,
    GradientCheckError,
    HyperPoisonError,
    NumericalError,
)

app = typer.Typer(
    name="hyperpoison",
    help="Optimal poisoning attacks and regularization learning via hypergradients.",
    no_args_is_help=True,
)
console = Console()

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CHECK = 3

ConfigOpt = typer.Option(None, "--config", "-c", help="Key-value config file")
PresetOpt = typer.Option(None, "--preset", "-p", help="Named preset, e.g. mnist-lr")
SeedOpt = typer.Option(None, "--seed", help="Master seed")
OutOpt = typer.Option(None, "--out", "-o", help="Result file (JSON lines)")
JobsOpt = typer.Option(None, "--jobs", "-j", help="Parallel workers")
SetOpt = typer.Option(None, "--set", help="Override, e.g. attack.T_mul=20 (repeatable)")
VerboseOpt = typer.Option(False, "--verbose", "-v", help="Debug logging")


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map library errors to the documented exit codes."""
    try:
        yield
    except (ConfigError, DatasetError) as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(EXIT_CONFIG) from e
    except (NumericalError, ConvergenceError) as e:
        console.print(f"[red]Numerical failure:[/] {e}")
        raise typer.Exit(EXIT_NUMERICAL) from e
    except GradientCheckError as e:
        console.print(f"[red]Check failed:[/] {e}")
        raise typer.Exit(EXIT_CHECK) from e
    except HyperPoisonError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(EXIT_NUMERICAL) from e


def _resolve(
    config: Optional[Path],
    preset: Optional[str],
    overrides: Optional[list[str]],
    seed: Optional[int],
    out: Optional[Path],
    jobs: Optional[int],
) -> ExperimentConfig:
    return resolve_config(
        preset=preset,
        path=config,
        overrides=overrides or [],
        master_seed=seed,
        output_path=str(out) if out is not None else None,
        jobs=jobs,
    )


@app.command()
def attack(
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = PresetOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[Path] = OutOpt,
    jobs: Optional[int] = JobsOpt,
    overrides: Optional[list[str]] = SetOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Run the poisoning attack sweep and evaluate every fraction."""
    from hyperpoison.cli.formatters import format_config, format_projection
    from hyperpoison.experiments.attack_sweep import run_attack_sweep
    from hyperpoison.experiments.results import (
        projection,
        write_projection,
        write_records,
        write_timings,
    )

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, jobs)
        format_config("attack", cfg)
        result = run_attack_sweep(cfg)
        path = write_records(
            cfg.output_path, "attack", cfg, [*result.selections, *result.records]
        )
        write_projection(path, result.records)
        write_timings(path, result.timings)
        format_projection(projection(result.records))
        console.print(f"Saved results to [bold]{path}[/]")


@app.command()
def hyperlearn(
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = PresetOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[Path] = OutOpt,
    jobs: Optional[int] = JobsOpt,
    overrides: Optional[list[str]] = SetOpt,
    cv: bool = typer.Option(False, "--cv", help="Also select lambda by K-fold grid search"),
    verbose: bool = VerboseOpt,
) -> None:
    """Learn the regularization hyperparameter on clean data."""
    from hyperpoison.cli.formatters import format_config, format_hyperlearn
    from hyperpoison.experiments.hyperlearn import run_hyperlearn_experiment
    from hyperpoison.experiments.results import write_records

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, jobs)
        format_config("hyperlearn", cfg)
        result = run_hyperlearn_experiment(cfg, cv=cv)
        path = write_records(
            cfg.output_path, "hyperlearn", cfg, [*result.selections, *result.trajectory]
        )
        format_hyperlearn(result.trajectory, result.selections)
        console.print(f"Saved trajectory to [bold]{path}[/]")


@app.command("synth-demo")
def synth_demo(
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = typer.Option(
        "synthetic-lr", "--preset", "-p", help="Named preset"
    ),
    seed: Optional[int] = SeedOpt,
    out: Optional[Path] = OutOpt,
    jobs: Optional[int] = JobsOpt,
    overrides: Optional[list[str]] = SetOpt,
    no_map: bool = typer.Option(False, "--no-map", help="Skip the location grid"),
    verbose: bool = VerboseOpt,
) -> None:
    """Single poisoning point on the two-Gaussian task, with error and lambda maps."""
    from hyperpoison.cli.formatters import format_synth
    from hyperpoison.experiments.results import write_grid, write_records
    from hyperpoison.experiments.synth_demo import run_synth_demo

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, jobs)
        result = run_synth_demo(cfg, with_map=not no_map)
        path = write_records(cfg.output_path, "synth-demo", cfg, [*result.runs, *result.cells])
        if result.cells:
            write_grid(path, result.cells)
        format_synth(result.runs)
        console.print(f"Saved {len(result.cells)} grid cells to [bold]{path}[/]")


@app.command("val-sizes")
def val_sizes(
    sizes: list[int] = typer.Option(..., "--n-val", help="Validation size (repeatable)"),
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = PresetOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[Path] = OutOpt,
    jobs: Optional[int] = JobsOpt,
    overrides: Optional[list[str]] = SetOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Attack with and without learned lambda for several validation-set sizes."""
    from hyperpoison.cli.formatters import format_config, format_val_sizes
    from hyperpoison.experiments.results import write_records, write_val_sizes
    from hyperpoison.experiments.val_sizes import run_val_size_sweep

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, jobs)
        format_config("val-sizes", cfg)
        rows = run_val_size_sweep(cfg, sizes)
        path = write_records(cfg.output_path, "val-sizes", cfg, rows)
        write_val_sizes(path, rows)
        format_val_sizes(rows)
        console.print(f"Saved results to [bold]{path}[/]")


@app.command("eval")
def evaluate(
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = PresetOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[Path] = OutOpt,
    overrides: Optional[list[str]] = SetOpt,
    lam: Optional[float] = typer.Option(None, "--lambda", help="Log-scale lambda"),
    verbose: bool = VerboseOpt,
) -> None:
    """Train on the clean task and report test error, norms and top features."""
    from hyperpoison.cli.formatters import format_eval
    from hyperpoison.experiments.evaluate import run_eval
    from hyperpoison.experiments.results import write_records

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, None)
        records = run_eval(cfg, lam)
        format_eval(records)
        if out is not None:
            path = write_records(cfg.output_path, "eval", cfg, records)
            console.print(f"Saved results to [bold]{path}[/]")


@app.command("check-gradients")
def check_gradients(
    config: Optional[Path] = ConfigOpt,
    preset: Optional[str] = PresetOpt,
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for the random instances"),
    out: Optional[Path] = OutOpt,
    overrides: Optional[list[str]] = SetOpt,
    n_lr: int = typer.Option(20, "--n-lr", help="Random logistic-regression instances"),
    n_mlp: int = typer.Option(10, "--n-mlp", help="Random MLP instances"),
    corrupt: float = typer.Option(
        0.0, "--corrupt", hidden=True, help="Scale engine output by 1 + value"
    ),
    verbose: bool = VerboseOpt,
) -> None:
    """Compare the hypergradient engines against closed forms and finite differences.

    The implicit engine uses the ``cg`` section of the resolved config.
    """
    from hyperpoison.cli.formatters import format_checks
    from hyperpoison.experiments.gradcheck import run_gradient_checks, scale_corruption
    from hyperpoison.experiments.results import write_records

    _setup_logging(verbose)
    with _exit_codes():
        cfg = _resolve(config, preset, overrides, seed, out, None)
        hook = scale_corruption(1.0 + corrupt) if corrupt else None
        records = run_gradient_checks(n_lr, n_mlp, cfg.master_seed, hook, cfg.cg)
        format_checks(records)
        if out is not None:
            path = write_records(cfg.output_path, "check-gradients", cfg, records)
            console.print(f"Saved results to [bold]{path}[/]")
        failed = [r.name for r in records if not r.passed]
        if failed:
            raise GradientCheckError(f"{len(failed)} check(s) failed: {', '.join(failed)}")


if __name__ == "__main__":
    app()
