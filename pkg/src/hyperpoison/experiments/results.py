"""Result files: JSON lines, CSV projection, timings and sweep tables."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Sequence

import pandas as pd
from pydantic import BaseModel

from hyperpoison import __version__
from hyperpoison.core.config import ExperimentConfig
from hyperpoison.core.records import (
    ResultRecord,
    RunHeader,
    SynthCellRecord,
    TimingRecord,
    ValSizeRecord,
)

logger = logging.getLogger(__name__)


def write_records(
    path: str | Path,
    command: str,
    config: ExperimentConfig,
    records: Sequence[BaseModel],
) -> Path:
    """Header line with version and resolved config, then one line per record."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = RunHeader(command=command, version=__version__, config=config.model_dump(mode="json"))
    with out.open("w", encoding="utf-8") as fh:
        fh.write(header.model_dump_json() + "\n")
        for record in records:
            fh.write(record.model_dump_json() + "\n")
    logger.info("Wrote %d records to %s", len(records), out)
    return out


def read_records(path: str | Path) -> list[dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def sibling(path: str | Path, suffix: str) -> Path:
    """``results.jsonl`` -> ``results<suffix>``."""
    p = Path(path)
    return p.with_name(p.stem + suffix)


def projection(records: Sequence[ResultRecord]) -> pd.DataFrame:
    """Mean test error and mean lambda per (mode, fraction)."""
    frame = pd.DataFrame(
        {
            "mode": [r.mode for r in records],
            "fraction": [r.fraction for r in records],
            "test_error": [r.test_error for r in records],
            "lambda": [
                sum(r.lambdas) / len(r.lambdas) if r.lambdas else float("nan") for r in records
            ],
        }
    )
    if frame.empty:
        return frame
    return (
        frame.groupby(["mode", "fraction"], sort=True)
        .agg(mean_test_error=("test_error", "mean"), mean_lambda=("lambda", "mean"))
        .reset_index()
    )


def write_projection(path: str | Path, records: Sequence[ResultRecord]) -> Path:
    out = sibling(path, ".csv")
    projection(records).to_csv(out, index=False)
    return out


def write_timings(path: str | Path, timings: Sequence[TimingRecord]) -> Path:
    out = sibling(path, ".timings.csv")
    pd.DataFrame([t.model_dump() for t in timings]).to_csv(out, index=False)
    return out


def grid_table(cells: Sequence[SynthCellRecord]) -> pd.DataFrame:
    """One row per poison location, coordinates split into columns."""
    return pd.DataFrame(
        {
            "seed": [c.seed for c in cells],
            "x0": [c.x[0] for c in cells],
            "x1": [c.x[1] for c in cells],
            "val_error_noreg": [c.val_error_noreg for c in cells],
            "val_error_reg": [c.val_error_reg for c in cells],
            "lambda_star": [c.lambda_star for c in cells],
        }
    )


def write_grid(path: str | Path, cells: Sequence[SynthCellRecord]) -> Path:
    out = sibling(path, ".grid.csv")
    grid_table(cells).to_csv(out, index=False)
    return out


def val_size_table(rows: Sequence[ValSizeRecord]) -> pd.DataFrame:
    """Relative test-error decrease per validation size and fraction."""
    return pd.DataFrame([r.model_dump(exclude={"kind"}) for r in rows])


def write_val_sizes(path: str | Path, rows: Sequence[ValSizeRecord]) -> Path:
    out = sibling(path, ".val_sizes.csv")
    val_size_table(rows).to_csv(out, index=False)
    return out
