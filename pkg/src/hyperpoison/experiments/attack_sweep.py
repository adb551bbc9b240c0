"""Attack sweep: every repetition, regularization mode and poison fraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from hyperpoison.attack.engine import AttackResult, run_attack
from hyperpoison.attack.selection import cross_validate_lambda
from hyperpoison.core.config import ExperimentConfig, RegMode
from hyperpoison.core.records import ResultRecord, SelectionRecord, TimingRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.base import load_task
from hyperpoison.data.splits import BinaryTask
from hyperpoison.experiments.common import (
    build_model_spec,
    build_reg,
    init_scheme,
    mode_reg,
    repetition_seed,
)
from hyperpoison.experiments.parallel import run_parallel
from hyperpoison.metrics.classification import test_error
from hyperpoison.metrics.features import FeatureSet, kuncheva_index, top_k_features
from hyperpoison.metrics.norms import weight_norms
from hyperpoison.models.spec import ModelSpec, RegSpec
from hyperpoison.models.training import fit

logger = logging.getLogger(__name__)


@dataclass
class SweepResult:
    records: list[ResultRecord] = field(default_factory=list)
    selections: list[SelectionRecord] = field(default_factory=list)
    timings: list[TimingRecord] = field(default_factory=list)


def clean_lambda(
    config: ExperimentConfig, spec: ModelSpec, task: BinaryTask, seed: int
) -> SelectionRecord:
    """Lambda chosen by K-fold cross-validation on the clean training set."""
    template = build_reg(config, spec, 0.0)
    result = cross_validate_lambda(
        task.train,
        spec,
        template,
        config.reg.cv_grid,
        config.eval.eta_tr,
        config.eval.epochs,
        folds=config.reg.cv_folds,
        criterion=config.reg.criterion,
        rng=RngStream(seed, "cv"),
        init_scheme=init_scheme(config, spec),
    )
    column = "val_loss" if config.reg.criterion == "loss" else "val_error"
    return SelectionRecord(
        repetition=-1,
        seed=seed,
        method="cv",
        criterion=config.reg.criterion,
        best_lambda=result.best_lambda,
        grid=[float(v) for v in result.table["lambda"]],
        scores=[float(v) for v in result.table[column]],
    )


def evaluate_attack(
    config: ExperimentConfig,
    spec: ModelSpec,
    task: BinaryTask,
    attack: AttackResult,
    template: RegSpec,
    mode: str,
    repetition: int,
    seed: int,
) -> tuple[list[ResultRecord], list[TimingRecord]]:
    """Retrain from scratch on every poisoned snapshot with the evaluation settings."""
    records: list[ResultRecord] = []
    timings: list[TimingRecord] = []
    baseline: dict[int, FeatureSet] = {}
    rng = RngStream(seed, f"eval/{mode}")
    for step, fr in enumerate(attack.fractions):
        reg = template.with_lambdas(fr.lambdas) if template.active else template
        w = fit(
            spec,
            fr.poisoned,
            reg,
            config.eval.eta_tr,
            config.eval.epochs,
            init_scheme(config, spec),
            rng.derive(f"fraction{step}"),
        )
        norms = weight_norms(spec, w)
        consistency: dict[str, float] = {}
        for k in config.eval.top_k:
            if not 0 < k < spec.n_features:
                continue
            features = top_k_features(w, k)
            baseline.setdefault(k, features)
            consistency[f"k={k}"] = kuncheva_index(baseline[k], features)
        records.append(
            ResultRecord(
                repetition=repetition,
                seed=seed,
                mode=mode,
                fraction=fr.fraction,
                n_poison=fr.n_poison,
                test_error=test_error(spec, w, task.test),
                lambdas=list(reg.lambdas),
                weight_norms=list(norms.per_layer),
                weight_norm_total=norms.total,
                consistency=consistency,
                val_loss_final=fr.val_loss[-1] if fr.val_loss else None,
            )
        )
        timings.append(
            TimingRecord(
                repetition=repetition, mode=mode, fraction=fr.fraction, seconds=fr.wall_time
            )
        )
    return records, timings


def _run_cell(
    config: ExperimentConfig,
    repetition: int,
    mode: RegMode,
    task: BinaryTask,
    cv_lambda: Optional[float],
) -> tuple[list[ResultRecord], list[TimingRecord]]:
    seed = repetition_seed(config, repetition)
    spec = build_model_spec(config, task.train.m)
    template, learn = mode_reg(config, spec, mode, cv_lambda)
    logger.info("Repetition %d, mode %s: attacking", repetition, mode)
    attack = run_attack(
        task.train,
        task.val,
        spec,
        template,
        config.attack.model_copy(update={"seed": seed}),
        learn_lambda=learn,
        init_scheme=init_scheme(config, spec),
    )
    return evaluate_attack(config, spec, task, attack, template, mode, repetition, seed)


def run_attack_sweep(config: ExperimentConfig) -> SweepResult:
    """``repetitions x modes x fractions`` evaluated cells.

    Every repetition draws its own data split from its own seed. Records are
    ordered by repetition, then mode (config order), then fraction, whatever
    the number of workers.
    """
    result = SweepResult()
    tasks: list[tuple[int, RegMode, BinaryTask, Optional[float]]] = []
    for rep in range(config.repetitions):
        seed = repetition_seed(config, rep)
        task = load_task(config.task, seed)
        cv_lambda: Optional[float] = None
        if "clean" in config.reg.modes:
            spec = build_model_spec(config, task.train.m)
            selection = clean_lambda(config, spec, task, seed)
            selection = selection.model_copy(update={"repetition": rep})
            result.selections.append(selection)
            cv_lambda = selection.best_lambda
        tasks.extend((rep, mode, task, cv_lambda) for mode in config.reg.modes)

    cells = run_parallel(lambda t: _run_cell(config, *t), tasks, config.jobs)
    for records, timings in cells:
        result.records.extend(records)
        result.timings.extend(timings)
    return result
