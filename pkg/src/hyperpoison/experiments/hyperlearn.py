"""Regularization-hyperparameter learning on a fixed training set."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from hyperpoison.attack.engine import run_hyperlearn
from hyperpoison.core.config import ExperimentConfig
from hyperpoison.core.records import HyperlearnRecord, SelectionRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.base import load_task
from hyperpoison.data.dataset import Dataset
from hyperpoison.experiments.attack_sweep import clean_lambda
from hyperpoison.experiments.common import (
    build_model_spec,
    build_reg,
    init_scheme,
    repetition_seed,
)
from hyperpoison.experiments.parallel import run_parallel

logger = logging.getLogger(__name__)


@dataclass
class HyperlearnOutput:
    trajectory: list[HyperlearnRecord] = field(default_factory=list)
    selections: list[SelectionRecord] = field(default_factory=list)


def _one(
    config: ExperimentConfig, repetition: int, cv: bool, train: Optional[Dataset]
) -> HyperlearnOutput:
    seed = repetition_seed(config, repetition)
    task = load_task(config.task, seed)
    if train is not None:
        task = task._replace(train=train)
    spec = build_model_spec(config, task.train.m)
    out = HyperlearnOutput()
    learned = run_hyperlearn(
        task.train,
        task.val,
        spec,
        build_reg(config, spec, config.attack.lambda_init),
        config.attack,
        init_scheme(config, spec),
        RngStream(seed, "hyperlearn"),
    )
    for it, (lambdas, loss) in enumerate(zip(learned.lambda_trajectory, learned.val_loss)):
        out.trajectory.append(
            HyperlearnRecord(
                repetition=repetition,
                seed=seed,
                iteration=it,
                lambdas=list(lambdas),
                val_loss=loss,
            )
        )
    if cv:
        selection = clean_lambda(config, spec, task, seed)
        out.selections.append(selection.model_copy(update={"repetition": repetition}))
    return out


def run_hyperlearn_experiment(
    config: ExperimentConfig, cv: bool = False, train: Optional[Dataset] = None
) -> HyperlearnOutput:
    """Learn lambda by reverse-mode hypergradients for every repetition.

    With ``cv`` the K-fold grid-search lambda is computed as well. ``train``
    replaces the task's training set (e.g. an already poisoned one).
    """
    parts = run_parallel(
        lambda rep: _one(config, rep, cv, train), list(range(config.repetitions)), config.jobs
    )
    merged = HyperlearnOutput()
    for part in parts:
        merged.trajectory.extend(part.trajectory)
        merged.selections.extend(part.selections)
    return merged
