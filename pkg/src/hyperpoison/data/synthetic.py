"""Two-class bivariate Gaussian task."""

from __future__ import annotations

import numpy as np

from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset

MEANS = (np.array([-3.0, 0.0]), np.array([3.0, 0.0]))
COVARIANCE = np.diag([2.5, 1.5])
BOUND = 9.5


def sample_gaussians(n_per_class: int, rng: RngStream) -> Dataset:
    """``n_per_class`` rows per class, class 0 first, clipped to ``[-9.5, 9.5]^2``."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    std = np.sqrt(np.diag(COVARIANCE))
    blocks = [mu + std * rng.normal((n_per_class, 2)) for mu in MEANS]
    X = np.clip(np.vstack(blocks), -BOUND, BOUND)
    y = np.repeat([0.0, 1.0], n_per_class)
    return Dataset(X, y, -BOUND, BOUND)


def gen_synthetic_gaussians(
    n_train_per_class: int = 16,
    n_val_per_class: int = 32,
    rng: RngStream | int = 0,
) -> tuple[Dataset, Dataset]:
    stream = rng if isinstance(rng, RngStream) else RngStream(rng, "synthetic")
    train = sample_gaussians(n_train_per_class, stream.derive("train"))
    val = sample_gaussians(n_val_per_class, stream.derive("val"))
    return train, val
