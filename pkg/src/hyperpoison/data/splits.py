"""Binary-class extraction, normalization and seeded balanced splits."""

from __future__ import annotations

import logging
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hyperpoison.core.exceptions import DatasetError
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.data.raw import RawImages

logger = logging.getLogger(__name__)

Normalization = Literal["unit_interval", "symmetric_unit"]

BOUNDS: dict[str, tuple[float, float]] = {
    "unit_interval": (0.0, 1.0),
    "symmetric_unit": (-1.0, 1.0),
}


class SplitSpec(BaseModel):
    """Sizes of the three balanced splits and the class pair ``(a -> 0, b -> 1)``."""

    model_config = ConfigDict(frozen=True)

    n_train: int = Field(ge=2)
    n_val: int = Field(ge=2)
    n_test: int = Field(ge=2)
    class_pair: tuple[int, int]
    normalization: Normalization = "unit_interval"
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> SplitSpec:
        if self.class_pair[0] == self.class_pair[1]:
            raise ValueError("class_pair labels must differ")
        for name in ("n_train", "n_val", "n_test"):
            if getattr(self, name) % 2:
                raise ValueError(f"{name} must be even for balanced splits")
        return self

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.n_train, self.n_val, self.n_test


class BinaryTask(NamedTuple):
    train: Dataset
    val: Dataset
    test: Dataset


def normalize(pixels: np.ndarray, normalization: Normalization) -> np.ndarray:
    """``x / 255`` into [0, 1] or ``x / 127.5 - 1`` into [-1, 1]."""
    x = np.asarray(pixels, dtype=np.float64)
    if normalization == "unit_interval":
        return x / 255.0
    return x / 127.5 - 1.0


def split_indices(labels: np.ndarray, split: SplitSpec) -> tuple[np.ndarray, ...]:
    """Pool indices of the train, validation and test rows.

    Every split holds the same number of rows from each class of the pair;
    splits never share a pool row. Rows inside a split are shuffled.
    """
    rng = RngStream(split.seed, "split")
    per_class: list[list[np.ndarray]] = []
    for cls in split.class_pair:
        pool = np.flatnonzero(labels == cls)
        needed = sum(split.sizes) // 2
        if pool.size < needed:
            raise DatasetError(
                f"class {cls} has {pool.size} samples, the split needs {needed}"
            )
        chosen = pool[rng.derive(f"class{cls}").permutation(pool.size)[:needed]]
        bounds = np.cumsum([0] + [s // 2 for s in split.sizes])
        per_class.append([chosen[bounds[i] : bounds[i + 1]] for i in range(3)])
    out = []
    for i, name in enumerate(("train", "val", "test")):
        idx = np.concatenate([per_class[0][i], per_class[1][i]])
        out.append(idx[rng.derive(name).permutation(idx.size)])
    return tuple(out)


def make_binary_task(raw: RawImages, split: SplitSpec) -> BinaryTask:
    """Filter ``raw`` to the class pair and draw normalized balanced splits."""
    lo, hi = BOUNDS[split.normalization]
    positive = split.class_pair[1]
    datasets = []
    for idx in split_indices(raw.labels, split):
        X = normalize(raw.images[idx], split.normalization)
        y = (raw.labels[idx] == positive).astype(np.float64)
        datasets.append(Dataset(X, y, lo, hi))
    task = BinaryTask(*datasets)
    logger.info(
        "Binary task %d vs %d: %d/%d/%d rows, %d features",
        split.class_pair[0],
        positive,
        task.train.n,
        task.val.n,
        task.test.n,
        task.train.m,
    )
    return task
