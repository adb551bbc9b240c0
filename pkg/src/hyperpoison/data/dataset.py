"""Labelled binary-classification dataset with per-feature bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from hyperpoison.core.exceptions import ShapeError


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``X`` (n x m), labels ``y`` in {0, 1} and feature box.

    ``lo`` and ``hi`` are the per-feature feasible bounds (the domain a
    poisoning point must stay inside). Instances are immutable; row updates
    return a new dataset.
    """

    X: np.ndarray
    y: np.ndarray
    lo: np.ndarray = field(default_factory=lambda: np.empty(0))
    hi: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise ShapeError(f"X must be 2-D, got shape {X.shape}")
        n, m = X.shape
        if n < 1:
            raise ShapeError("dataset needs at least one row")
        if y.shape[0] != n:
            raise ShapeError(f"{n} rows but {y.shape[0]} labels")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ShapeError("labels must be 0 or 1")
        if not np.all(np.isfinite(X)):
            raise ShapeError("features must be finite")
        lo = np.asarray(self.lo, dtype=np.float64).ravel()
        hi = np.asarray(self.hi, dtype=np.float64).ravel()
        if lo.size == 0:
            lo = np.full(m, -np.inf)
        if hi.size == 0:
            hi = np.full(m, np.inf)
        if lo.size == 1:
            lo = np.full(m, lo[0])
        if hi.size == 1:
            hi = np.full(m, hi[0])
        if lo.shape != (m,) or hi.shape != (m,):
            raise ShapeError(f"bounds must have {m} entries")
        if np.any(lo > hi):
            raise ShapeError("feature bounds inverted (lo > hi)")
        if np.any(X < lo) or np.any(X > hi):
            raise ShapeError("features outside declared bounds")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def m(self) -> int:
        return int(self.X.shape[1])

    def subset(self, indices: Sequence[int] | np.ndarray) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.lo, self.hi)

    def replace_rows(
        self,
        indices: Sequence[int] | np.ndarray,
        X_rows: np.ndarray,
        y_rows: Optional[np.ndarray] = None,
    ) -> Dataset:
        """Return a copy with rows at ``indices`` overwritten."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ShapeError(f"row index out of range for {self.n} rows")
        X = self.X.copy()
        y = self.y.copy()
        X[idx] = X_rows
        if y_rows is not None:
            y[idx] = y_rows
        return Dataset(X, y, self.lo, self.hi)

    def concat(self, other: Dataset) -> Dataset:
        if other.m != self.m:
            raise ShapeError(f"cannot concatenate {self.m} and {other.m} features")
        return Dataset(
            np.vstack([self.X, other.X]),
            np.concatenate([self.y, other.y]),
            self.lo,
            self.hi,
        )

    def class_counts(self) -> tuple[int, int]:
        ones = int(self.y.sum())
        return self.n - ones, ones
