"""Single poisoning point on the two-Gaussian task.

A validation point is cloned, its label flipped and the clone appended to
the training set. Its location is then either optimized by the attack or
swept over a grid, with and without a fixed L2 penalty.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hyperpoison.attack.engine import attack_step
from hyperpoison.attack.poison import PoisonSet
from hyperpoison.attack.selection import grid_search_lambda
from hyperpoison.core.config import ExperimentConfig
from hyperpoison.core.records import SynthCellRecord, SynthRunRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.data.synthetic import MEANS, gen_synthetic_gaussians
from hyperpoison.experiments.common import repetition_seed
from hyperpoison.experiments.parallel import run_parallel
from hyperpoison.metrics.classification import test_error
from hyperpoison.models.spec import ModelSpec, RegSpec
from hyperpoison.models.training import fit, init_params

logger = logging.getLogger(__name__)

SPEC = ModelSpec(kind="lr", layer_sizes=(2, 1))


@dataclass
class SynthScenario:
    """Clean task plus the appended, label-flipped clone of a validation point."""

    train: Dataset
    val: Dataset
    poisoned: Dataset
    poison: PoisonSet


@dataclass
class SynthOutput:
    runs: list[SynthRunRecord] = field(default_factory=list)
    cells: list[SynthCellRecord] = field(default_factory=list)


def make_scenario(config: ExperimentConfig, seed: int) -> SynthScenario:
    rng = RngStream(seed, "synth-demo")
    train, val = gen_synthetic_gaussians(
        config.task.n_train // 2, config.task.n_val // 2, rng.derive("data")
    )
    row = int(rng.derive("clone").choice(val.n, 1)[0])
    clone = Dataset(val.X[row : row + 1], 1.0 - val.y[row : row + 1], val.lo, val.hi)
    poisoned = train.concat(clone)
    poison = PoisonSet(clone.X, clone.y, np.array([train.n]), train.lo, train.hi)
    return SynthScenario(train, val, poisoned, poison)


def _reg(value: Optional[float]) -> RegSpec:
    return RegSpec() if value is None else RegSpec(norm="l2", lambdas=(value,))


def val_error_at(
    config: ExperimentConfig, scenario: SynthScenario, location: np.ndarray, reg: RegSpec
) -> float:
    """Validation error of the model trained with the poison at ``location``."""
    data = scenario.poison.with_features(location[None, :]).apply(scenario.poisoned)
    w = fit(SPEC, data, reg, config.eval.eta_tr, config.eval.epochs, "zeros")
    return test_error(SPEC, w, scenario.val)


def lambda_star_at(
    config: ExperimentConfig, scenario: SynthScenario, location: np.ndarray
) -> float:
    data = scenario.poison.with_features(location[None, :]).apply(scenario.poisoned)
    result = grid_search_lambda(
        data,
        scenario.val,
        SPEC,
        _reg(0.0),
        config.synth.lambda_grid,
        config.eval.eta_tr,
        config.eval.epochs,
        criterion=config.reg.criterion,
        init_scheme="zeros",
    )
    return result.best_lambda


def single_point_attack(
    config: ExperimentConfig, scenario: SynthScenario, reg: RegSpec
) -> tuple[PoisonSet, bool]:
    """Optimize the appended point for ``T_mul`` steps with lambda held fixed.

    Returns the final poison and whether every iterate stayed feasible.
    """
    poison = scenario.poison
    train = scenario.poisoned
    feasible = True
    for _ in range(config.attack.T_mul):
        out = attack_step(
            SPEC,
            train,
            poison,
            reg,
            scenario.val,
            config.attack,
            init_params(SPEC, "zeros"),
            learn_lambda=False,
        )
        poison, train = out.poison, out.train
        feasible = feasible and bool(
            np.all(poison.Xp >= poison.lo) and np.all(poison.Xp <= poison.hi)
        )
    return poison, feasible


def _seed_run(config: ExperimentConfig, repetition: int) -> SynthOutput:
    seed = repetition_seed(config, repetition)
    scenario = make_scenario(config, seed)
    fixed = config.synth.fixed_lambda
    start = scenario.poison.Xp[0]

    p_noreg, ok_noreg = single_point_attack(config, scenario, _reg(None))
    p_reg, ok_reg = single_point_attack(config, scenario, _reg(fixed))
    x_attack = p_noreg.Xp[0]
    # Where the flipped label agrees with the data, the point is harmless.
    x_cluster = MEANS[int(scenario.poison.yp[0])]

    clean_noreg = fit(SPEC, scenario.train, _reg(None), config.eval.eta_tr, config.eval.epochs)
    clean_reg = fit(SPEC, scenario.train, _reg(fixed), config.eval.eta_tr, config.eval.epochs)
    run = SynthRunRecord(
        seed=seed,
        clean_error_noreg=test_error(SPEC, clean_noreg, scenario.val),
        clean_error_reg=test_error(SPEC, clean_reg, scenario.val),
        attacked_error_noreg=val_error_at(config, scenario, x_attack, _reg(None)),
        attacked_error_reg=val_error_at(config, scenario, p_reg.Xp[0], _reg(fixed)),
        poison_noreg=[float(v) for v in x_attack],
        poison_reg=[float(v) for v in p_reg.Xp[0]],
        lambda_star_attack=lambda_star_at(config, scenario, x_attack),
        lambda_star_cluster=lambda_star_at(config, scenario, x_cluster),
        feasible=ok_noreg and ok_reg,
    )
    logger.info(
        "seed %d: clean %.3f -> attacked %.3f (no reg), start point %s",
        seed,
        run.clean_error_noreg,
        run.attacked_error_noreg,
        np.round(start, 3).tolist(),
    )
    return SynthOutput(runs=[run])


def location_grid(config: ExperimentConfig) -> np.ndarray:
    axis = np.linspace(config.synth.grid_lo, config.synth.grid_hi, config.synth.grid_points)
    g0, g1 = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([g0.ravel(), g1.ravel()])


def error_map(config: ExperimentConfig, repetition: int = 0) -> list[SynthCellRecord]:
    """Validation errors and selected lambda for every grid location of the poison."""
    seed = repetition_seed(config, repetition)
    scenario = make_scenario(config, seed)
    fixed = config.synth.fixed_lambda
    cells = []
    for location in location_grid(config):
        cells.append(
            SynthCellRecord(
                seed=seed,
                x=[float(v) for v in location],
                val_error_noreg=val_error_at(config, scenario, location, _reg(None)),
                val_error_reg=val_error_at(config, scenario, location, _reg(fixed)),
                lambda_star=lambda_star_at(config, scenario, location),
            )
        )
    return cells


def run_synth_demo(config: ExperimentConfig, with_map: bool = True) -> SynthOutput:
    """Attack summaries for every repetition; the map for the first one."""
    parts = run_parallel(
        lambda rep: _seed_run(config, rep), list(range(config.repetitions)), config.jobs
    )
    out = SynthOutput()
    for part in parts:
        out.runs.extend(part.runs)
    if with_map:
        out.cells = error_map(config)
    return out
