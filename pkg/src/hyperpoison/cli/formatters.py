"""Rich output formatting for CLI."""

from __future__ import annotations

from typing import Sequence

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from hyperpoison.core.config import ExperimentConfig
from hyperpoison.core.records import (
    CheckRecord,
    EvalRecord,
    HyperlearnRecord,
    SelectionRecord,
    SynthRunRecord,
    ValSizeRecord,
)

console = Console()


def _lam(values: Sequence[float]) -> str:
    return ", ".join(f"{v:.3f}" for v in values) if values else "-"


def format_config(command: str, config: ExperimentConfig) -> None:
    a = config.attack
    console.print(
        Panel(
            f"[bold]{config.task.dataset}[/] | model [bold]{config.model.kind}[/] | "
            f"reg [bold]{config.reg.norm}[/] ({', '.join(config.reg.modes)}) | "
            f"T_mul={a.T_mul} alpha={a.alpha} eta={a.eta} T={a.T} | "
            f"repetitions={config.repetitions} seed={config.master_seed}",
            title=command,
        )
    )


def format_projection(table: pd.DataFrame) -> None:
    if table.empty:
        console.print("[yellow]No results.[/]")
        return
    out = Table(title="Mean test error per mode and poison fraction")
    out.add_column("Mode", style="cyan")
    out.add_column("Fraction", justify="right")
    out.add_column("Test error", justify="right")
    out.add_column("Mean lambda", justify="right")
    for row in table.itertuples(index=False):
        lam = "-" if pd.isna(row.mean_lambda) else f"{row.mean_lambda:.3f}"
        out.add_row(row.mode, f"{row.fraction:.0%}", f"{row.mean_test_error:.4f}", lam)
    console.print(out)


def format_hyperlearn(
    trajectory: Sequence[HyperlearnRecord], selections: Sequence[SelectionRecord]
) -> None:
    table = Table(title="Learned lambda")
    table.add_column("Seed", justify="right")
    table.add_column("Initial A", justify="right")
    table.add_column("Final A", justify="right")
    table.add_column("Lambda")
    by_seed: dict[int, list[HyperlearnRecord]] = {}
    for rec in trajectory:
        by_seed.setdefault(rec.seed, []).append(rec)
    for seed, recs in by_seed.items():
        table.add_row(
            str(seed), f"{recs[0].val_loss:.5f}", f"{recs[-1].val_loss:.5f}", _lam(recs[-1].lambdas)
        )
    console.print(table)
    for sel in selections:
        console.print(
            f"Seed {sel.seed}: cross-validated lambda [bold]{sel.best_lambda:.3f}[/] "
            f"({sel.criterion})"
        )


def format_synth(runs: Sequence[SynthRunRecord]) -> None:
    table = Table(title="Single-point attack on the Gaussian task")
    table.add_column("Seed", justify="right")
    table.add_column("Clean", justify="right")
    table.add_column("Attacked", justify="right")
    table.add_column("Clean (L2)", justify="right")
    table.add_column("Attacked (L2)", justify="right")
    table.add_column("lambda* attack / cluster", justify="right")
    for r in runs:
        table.add_row(
            str(r.seed),
            f"{r.clean_error_noreg:.3f}",
            f"{r.attacked_error_noreg:.3f}",
            f"{r.clean_error_reg:.3f}",
            f"{r.attacked_error_reg:.3f}",
            f"{r.lambda_star_attack:.1f} / {r.lambda_star_cluster:.1f}",
        )
    console.print(table)


def format_eval(records: Sequence[EvalRecord]) -> None:
    table = Table(title="Clean evaluation")
    table.add_column("Seed", justify="right")
    table.add_column("Lambda")
    table.add_column("Test error", justify="right")
    table.add_column("||w||^2/d", justify="right")
    table.add_column("Top features")
    for r in records:
        top = "; ".join(f"{k}: {v[:5]}" for k, v in r.top_features.items())
        table.add_row(
            str(r.seed), _lam(r.lambdas), f"{r.test_error:.4f}", f"{r.weight_norm_total:.4g}", top
        )
    console.print(table)


def format_checks(records: Sequence[CheckRecord]) -> None:
    table = Table(title="Gradient checks")
    table.add_column("Check", style="cyan")
    table.add_column("Max rel. error", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Result", justify="center")
    for r in records:
        status = Text("PASS", style="green") if r.passed else Text("FAIL", style="red")
        table.add_row(r.name, f"{r.max_rel_error:.3e}", f"{r.tolerance:.0e}", status)
    console.print(table)


def format_val_sizes(rows: Sequence[ValSizeRecord]) -> None:
    table = Table(title="Test error by validation-set size")
    table.add_column("n_val", justify="right", style="cyan")
    table.add_column("Fraction", justify="right")
    table.add_column("No reg.", justify="right")
    table.add_column("Learned lambda", justify="right")
    table.add_column("Rel. decrease", justify="right")
    for r in rows:
        rel = "-" if r.relative_decrease is None else f"{r.relative_decrease:+.1%}"
        table.add_row(
            str(r.n_val),
            f"{r.fraction:.0%}",
            f"{r.test_error_noreg:.4f}",
            f"{r.test_error_rmd:.4f}",
            rel,
        )
    console.print(table)
