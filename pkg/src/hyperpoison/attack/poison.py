"""Poisoning points and their feasible box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.numerics.linalg import clip_elementwise


@dataclass(frozen=True)
class PoisonSet:
    """Poison features ``Xp`` replacing the training rows ``indices``.

    Labels ``yp`` are flipped once at initialization and never change.
    """

    Xp: np.ndarray
    yp: np.ndarray
    indices: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        if np.unique(idx).size != idx.size:
            raise ValueError("poison indices must be distinct")
        Xp = np.asarray(self.Xp, dtype=np.float64).reshape(idx.size, -1)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "Xp", Xp)

    @property
    def n_p(self) -> int:
        return int(self.indices.size)

    @classmethod
    def empty(cls, data: Dataset) -> PoisonSet:
        return cls(
            np.zeros((0, data.m)), np.zeros(0), np.zeros(0, np.int64), data.lo, data.hi
        )

    def with_features(self, Xp: np.ndarray) -> PoisonSet:
        return PoisonSet(project(Xp, self.lo, self.hi), self.yp, self.indices, self.lo, self.hi)

    def apply(self, data: Dataset) -> Dataset:
        """``data`` with the poison rows substituted."""
        if self.n_p == 0:
            return data
        return data.replace_rows(self.indices, self.Xp, self.yp)


def project(x: np.ndarray, lo: np.ndarray | float, hi: np.ndarray | float) -> np.ndarray:
    """Projection onto the box ``[lo, hi]`` (element-wise clip)."""
    return clip_elementwise(x, lo, hi)


def init_poison(
    train: Dataset,
    n_p: int,
    rng: RngStream,
    exclude: Optional[Sequence[int] | np.ndarray] = None,
) -> PoisonSet:
    """Clone ``n_p`` distinct training rows, flip their labels.

    Rows listed in ``exclude`` (already-frozen poisons) are never drawn.
    """
    banned = np.zeros(train.n, dtype=bool)
    if exclude is not None:
        banned[np.asarray(exclude, dtype=np.int64)] = True
    candidates = np.flatnonzero(~banned)
    if n_p > candidates.size:
        raise ValueError(f"cannot draw {n_p} poisons from {candidates.size} clean rows")
    if n_p < 0:
        raise ValueError("n_p must be >= 0")
    idx = candidates[rng.choice(candidates.size, n_p)] if n_p else np.zeros(0, np.int64)
    Xp = project(train.X[idx], train.lo, train.hi)
    return PoisonSet(Xp, 1.0 - train.y[idx], idx, train.lo, train.hi)
