"""Shared test fixtures."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from hyperpoison.core.config import ExperimentConfig, resolve_config
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.data.idx import write_idx
from hyperpoison.models.spec import ModelSpec, RegSpec

TINY_ATTACK = [
    "attack.T_mul=2",
    "attack.T=5",
    "attack.poison_batch=2",
    "attack.fraction_schedule=[0, 0.125]",
    "eval.epochs=10",
    "task.n_train=16",
    "task.n_val=16",
    "task.n_test=40",
    "repetitions=1",
    'reg.cv_grid=[-2, 0]',
    "reg.cv_folds=2",
]


@pytest.fixture
def lr_spec() -> ModelSpec:
    """Logistic regression on three features."""
    return ModelSpec(kind="lr", layer_sizes=(3, 1))


@pytest.fixture
def mlp_spec() -> ModelSpec:
    """One hidden layer of four leaky-ReLU units."""
    return ModelSpec(kind="mlp", layer_sizes=(3, 4, 1))


@pytest.fixture
def toy_spec() -> ModelSpec:
    """Scalar location model with closed-form hypergradients."""
    return ModelSpec(kind="quadratic", layer_sizes=(1, 1), bias=False)


@pytest.fixture
def train_set() -> Dataset:
    """Twenty alternating-label rows in the box [-1, 1]^3."""
    gen = RngStream(11, "fixture/train").generator
    X = gen.uniform(-1.0, 1.0, (20, 3))
    y = np.arange(20) % 2
    return Dataset(X, y, -1.0, 1.0)


@pytest.fixture
def val_set() -> Dataset:
    gen = RngStream(11, "fixture/val").generator
    return Dataset(gen.uniform(-1.0, 1.0, (12, 3)), np.arange(12) % 2, -1.0, 1.0)


@pytest.fixture
def l2_reg() -> RegSpec:
    return RegSpec(norm="l2", lambdas=(-1.0,))


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    """Synthetic preset shrunk to a few seconds of work."""
    return resolve_config(preset="synthetic-lr", overrides=TINY_ATTACK)


@pytest.fixture
def mnist_dir(tmp_path: Path) -> Path:
    """Small IDX dataset with the MNIST file names: 4x4 images, 10 classes."""
    gen = RngStream(5, "fixture/mnist").generator
    root = tmp_path / "mnist"
    root.mkdir()
    for prefix, per_class in (("train", 30), ("t10k", 10)):
        labels = np.repeat(np.arange(10), per_class).astype(np.uint8)
        images = gen.integers(0, 256, (labels.size, 4, 4)).astype(np.uint8)
        write_idx(
            root / f"{prefix}-images-idx3-ubyte",
            root / f"{prefix}-labels-idx1-ubyte",
            images,
            labels,
        )
    return root
