"""Sensitivity of the attack and the learned lambda to the validation-set size.

Training and test sizes stay fixed; for each validation size the attack sweep
runs without regularization and with lambda learned on the validation set.
"""

from __future__ import annotations

import logging
from typing import Sequence

from hyperpoison.core.config import ExperimentConfig
from hyperpoison.core.exceptions import ConfigError
from hyperpoison.core.records import ResultRecord, ValSizeRecord
from hyperpoison.experiments.attack_sweep import run_attack_sweep
from hyperpoison.experiments.results import projection

logger = logging.getLogger(__name__)

SWEEP_MODES = ["none", "rmd"]


def sized_config(config: ExperimentConfig, n_val: int) -> ExperimentConfig:
    data = config.model_dump()
    data["task"]["n_val"] = n_val
    data["reg"]["modes"] = list(SWEEP_MODES)
    return ExperimentConfig.from_dict(data)


def relative_decrease(n_val: int, records: Sequence[ResultRecord]) -> list[ValSizeRecord]:
    """One row per fraction from the mean test errors of both modes."""
    table = projection(records)
    wide = table.pivot(index="fraction", columns="mode", values="mean_test_error")
    rows: list[ValSizeRecord] = []
    for fraction, errors in wide.iterrows():
        noreg, rmd = float(errors["none"]), float(errors["rmd"])
        rows.append(
            ValSizeRecord(
                n_val=n_val,
                fraction=float(fraction),
                test_error_noreg=noreg,
                test_error_rmd=rmd,
                relative_decrease=(noreg - rmd) / noreg if noreg > 0 else None,
            )
        )
    return rows


def run_val_size_sweep(
    config: ExperimentConfig, val_sizes: Sequence[int]
) -> list[ValSizeRecord]:
    """Attack sweep per validation size; rows ordered by size, then fraction."""
    if not val_sizes:
        raise ConfigError("at least one validation size is required", key="task.n_val")
    rows: list[ValSizeRecord] = []
    for n_val in val_sizes:
        sized = sized_config(config, n_val)
        logger.info("Validation size %d", n_val)
        sweep = run_attack_sweep(sized)
        rows.extend(relative_decrease(n_val, sweep.records))
    return rows

