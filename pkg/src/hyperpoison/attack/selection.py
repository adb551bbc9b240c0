"""Lambda selection by grid search and K-fold cross-validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd

from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.metrics.classification import test_error
from hyperpoison.models.objective import loss
from hyperpoison.models.spec import ModelSpec, RegSpec
from hyperpoison.models.training import InitScheme, fit

logger = logging.getLogger(__name__)

Criterion = Literal["loss", "error"]


@dataclass(frozen=True)
class SelectionResult:
    """Selected lambda and the per-grid-value scores (one row per value)."""

    best_lambda: float
    table: pd.DataFrame


def _with_lambda(reg: RegSpec, value: float) -> RegSpec:
    return reg.with_lambdas(np.full(max(reg.h, 1), value))


def _score(
    spec: ModelSpec,
    train: Dataset,
    heldout: Dataset,
    reg: RegSpec,
    eta: float,
    epochs: int,
    scheme: Optional[InitScheme],
    rng: Optional[RngStream],
) -> tuple[float, float]:
    w = fit(spec, train, reg, eta, epochs, scheme, rng)
    return loss(spec, w, heldout, reg, include_reg=False), test_error(spec, w, heldout)


def _pick(table: pd.DataFrame, column: str) -> float:
    """Lowest score; ties go to the smaller lambda."""
    ranked = table.sort_values([column, "lambda"], kind="mergesort")
    return float(ranked["lambda"].iloc[0])


def grid_search_lambda(
    train: Dataset,
    val: Dataset,
    spec: ModelSpec,
    reg: RegSpec,
    grid: Sequence[float],
    eta: float,
    epochs: int,
    criterion: Criterion = "loss",
    init_scheme: Optional[InitScheme] = None,
    rng: Optional[RngStream] = None,
) -> SelectionResult:
    """Train from scratch for every grid value and score on ``val``.

    Every group of a per-layer regularizer gets the same grid value.
    """
    if len(grid) == 0:
        raise ValueError("lambda grid must not be empty")
    if not reg.active:
        raise ValueError("grid search needs an active regularizer")
    rows = []
    for value in grid:
        val_loss, val_error = _score(
            spec, train, val, _with_lambda(reg, value), eta, epochs, init_scheme, rng
        )
        rows.append({"lambda": float(value), "val_loss": val_loss, "val_error": val_error})
    table = pd.DataFrame(rows)
    best = _pick(table, "val_loss" if criterion == "loss" else "val_error")
    logger.debug("grid search over %d values selected lambda=%.4f", len(grid), best)
    return SelectionResult(best, table)


def stratified_folds(y: np.ndarray, folds: int, rng: RngStream) -> list[np.ndarray]:
    """Seeded label-stratified partition of ``range(len(y))`` into ``folds`` parts."""
    assignment = np.empty(y.size, dtype=np.int64)
    for cls in (0.0, 1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.derive(f"class{int(cls)}").permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    return [np.flatnonzero(assignment == k) for k in range(folds)]


def cross_validate_lambda(
    train: Dataset,
    spec: ModelSpec,
    reg: RegSpec,
    grid: Sequence[float],
    eta: float,
    epochs: int,
    folds: int = 5,
    criterion: Criterion = "loss",
    rng: Optional[RngStream] = None,
    init_scheme: Optional[InitScheme] = None,
) -> SelectionResult:
    """K-fold grid search on the training set alone."""
    if len(grid) == 0:
        raise ValueError("lambda grid must not be empty")
    if not 2 <= folds <= train.n:
        raise ValueError(f"folds must lie in [2, {train.n}], got {folds}")
    stream = rng or RngStream(0, "cv")
    parts = stratified_folds(train.y, folds, stream.derive("folds"))
    rows = []
    for value in grid:
        reg_v = _with_lambda(reg, value)
        scores = []
        for k, heldout in enumerate(parts):
            fit_idx = np.concatenate([p for j, p in enumerate(parts) if j != k])
            scores.append(
                _score(
                    spec,
                    train.subset(fit_idx),
                    train.subset(heldout),
                    reg_v,
                    eta,
                    epochs,
                    init_scheme,
                    stream.derive(f"fold{k}"),
                )
            )
        arr = np.asarray(scores)
        rows.append(
            {
                "lambda": float(value),
                "val_loss": float(arr[:, 0].mean()),
                "val_error": float(arr[:, 1].mean()),
                "val_loss_std": float(arr[:, 0].std()),
            }
        )
    table = pd.DataFrame(rows)
    best = _pick(table, "val_loss" if criterion == "loss" else "val_error")
    logger.info("%d-fold cross-validation selected lambda=%.4f", folds, best)
    return SelectionResult(best, table)
