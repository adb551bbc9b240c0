"""Projected hypergradient ascent on poisons, descent on lambda.

One hyperiteration trains the model from a fresh ``w(0)``, obtains both
hypergradients from a single reverse-mode pass and updates::

    Xp     <- P_X(Xp + alpha * G_x)
    lambda <- P_L(lambda - alpha * g_lambda)

Poisons are optimized in batches. A finished batch stays frozen in the
training set, the next batch replaces fresh clean rows and lambda restarts
from ``lambda_init``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from hyperpoison.attack.poison import PoisonSet, init_poison, project
from hyperpoison.core.config import AttackConfig
from hyperpoison.core.exceptions import ConfigError, NumericalError
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, outer_value
from hyperpoison.hypergrad.rmd import rmd_hypergrad
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.models.training import (
    InitScheme,
    default_init_scheme,
    init_params,
    sgd_train,
)

logger = logging.getLogger(__name__)

GRAD_FLOOR = 1e-12


class HypergradFn(Protocol):
    def __call__(
        self,
        spec: ModelSpec,
        train_poisoned: Dataset,
        poison_rows: Sequence[int] | np.ndarray,
        reg: RegSpec,
        val: Dataset,
        w0: ParamVector,
        eta: float,
        T: int,
        include_reg_outer: bool = False,
    ) -> tuple[Hypergrad, ParamVector]: ...


@dataclass(frozen=True)
class StepInfo:
    val_loss: float
    grad_norm_x: float
    grad_norm_lambda: float
    normalized: bool


@dataclass(frozen=True)
class StepOutcome:
    poison: PoisonSet
    reg: RegSpec
    train: Dataset
    info: StepInfo


@dataclass(frozen=True)
class StepEvent:
    """Passed to ``run_attack`` callbacks after every hyperiteration."""

    fraction: float
    batch: int
    iteration: int
    poison: PoisonSet
    reg: RegSpec
    info: StepInfo


@dataclass
class FractionResult:
    fraction: float
    n_poison: int
    batches: list[PoisonSet]
    lambdas: tuple[float, ...]
    val_loss: list[float]
    wall_time: float
    poisoned: Dataset


@dataclass
class AttackResult:
    fractions: list[FractionResult] = field(default_factory=list)

    @property
    def poisoned(self) -> Dataset:
        return self.fractions[-1].poisoned

    @property
    def poison_indices(self) -> np.ndarray:
        idx = [p.indices for fr in self.fractions for p in fr.batches]
        return np.concatenate(idx) if idx else np.zeros(0, np.int64)


def lambda_bounds(config: AttackConfig, h: int) -> tuple[np.ndarray, np.ndarray]:
    return np.full(h, config.lambda_lo), np.full(h, config.lambda_hi)


def initial_reg(reg_template: RegSpec, config: AttackConfig) -> RegSpec:
    """``reg_template`` with every lambda reset to ``lambda_init`` (clipped)."""
    if not reg_template.active:
        return reg_template
    lo, hi = lambda_bounds(config, reg_template.h)
    lam = project(np.full(reg_template.h, config.lambda_init), lo, hi)
    return reg_template.with_lambdas(lam)


def fresh_w0(spec: ModelSpec, scheme: InitScheme, rng: RngStream, tag: str) -> ParamVector:
    if scheme == "zeros":
        return init_params(spec, "zeros")
    return init_params(spec, scheme, rng.derive(tag))


def attack_step(
    spec: ModelSpec,
    train: Dataset,
    poison: PoisonSet,
    reg: RegSpec,
    val: Dataset,
    config: AttackConfig,
    w0: ParamVector,
    learn_lambda: bool = True,
    hypergrad_fn: HypergradFn = rmd_hypergrad,
) -> StepOutcome:
    """One simultaneous projected update of ``Xp`` and lambda.

    ``train`` must already contain the poison rows. ``info.val_loss`` is the
    validation objective before the update.

    Raises:
        NumericalError: if the hypergradient is not finite.
    """
    hg, w_T = hypergrad_fn(
        spec,
        train,
        poison.indices,
        reg,
        val,
        w0,
        config.eta,
        config.T,
        include_reg_outer=config.include_reg_outer,
    )
    if not hg.is_finite():
        raise NumericalError("non-finite hypergradient", phase="attack")
    val_loss = outer_value(spec, w_T, val, reg, config.include_reg_outer)

    G = hg.d_poison
    g_norm_x = float(np.linalg.norm(G))
    normalized = False
    if poison.n_p and config.normalize_xp_grad:
        if g_norm_x < GRAD_FLOOR:
            logger.warning("poison hypergradient vanished (%.1e); step not normalized", g_norm_x)
        else:
            G = G / g_norm_x
            normalized = True
    new_poison = poison
    if poison.n_p:
        new_poison = poison.with_features(poison.Xp + config.alpha * G)

    g_lam = hg.d_lambda
    new_reg = reg
    if learn_lambda and reg.active:
        step = np.sign(g_lam) if config.lambda_sign_update else g_lam
        lo, hi = lambda_bounds(config, reg.h)
        new_reg = reg.with_lambdas(project(reg.lambda_array() - config.alpha * step, lo, hi))

    info = StepInfo(val_loss, g_norm_x, float(np.linalg.norm(g_lam)), normalized)
    logger.debug(
        "step: A=%.6f |Gx|=%.3e |g_lambda|=%.3e lambda=%s",
        val_loss,
        info.grad_norm_x,
        info.grad_norm_lambda,
        new_reg.lambdas,
    )
    return StepOutcome(new_poison, new_reg, new_poison.apply(train), info)


def _batch_sizes(increment: int, poison_batch: int) -> list[int]:
    if increment == 0:
        return []
    size = min(poison_batch, increment)
    if increment % size:
        raise ConfigError(
            f"poison_batch {poison_batch} does not divide a fraction increment of "
            f"{increment} points",
            key="attack.poison_batch",
        )
    return [size] * (increment // size)


def poison_counts(n_train: int, schedule: Sequence[float]) -> list[int]:
    """Cumulative poison counts per fraction."""
    return [int(round(f * n_train)) for f in schedule]


@dataclass
class HyperlearnResult:
    lambdas: tuple[float, ...]
    lambda_trajectory: list[tuple[float, ...]]
    val_loss: list[float]


def run_hyperlearn(
    train: Dataset,
    val: Dataset,
    spec: ModelSpec,
    reg_template: RegSpec,
    config: AttackConfig,
    init_scheme: Optional[InitScheme] = None,
    rng: Optional[RngStream] = None,
    callback: Optional[Callable[[StepEvent], None]] = None,
    hypergrad_fn: HypergradFn = rmd_hypergrad,
) -> HyperlearnResult:
    """Projected hypergradient descent on lambda alone, ``T_mul`` iterations.

    ``val_loss`` has ``T_mul + 1`` entries: the objective before every
    update and after the last one.
    """
    if not reg_template.active:
        raise ConfigError("hyperparameter learning needs a regularizer", key="reg.norm")
    scheme = init_scheme or default_init_scheme(spec)
    stream = rng or RngStream(config.seed, "hyperlearn")
    reg = initial_reg(reg_template, config)
    empty = PoisonSet.empty(train)
    lambdas = [reg.lambdas]
    losses: list[float] = []
    for it in range(config.T_mul):
        w0 = fresh_w0(spec, scheme, stream, f"w0/{it}")
        out = attack_step(
            spec, train, empty, reg, val, config, w0, learn_lambda=True, hypergrad_fn=hypergrad_fn
        )
        reg = out.reg
        lambdas.append(reg.lambdas)
        losses.append(out.info.val_loss)
        if callback is not None:
            callback(StepEvent(0.0, -1, it, empty, reg, out.info))
    w0 = fresh_w0(spec, scheme, stream, f"w0/{config.T_mul}")
    w_T, _ = sgd_train(spec, train, reg, w0, config.eta, config.T)
    losses.append(outer_value(spec, w_T, val, reg, config.include_reg_outer))
    logger.info("Learned lambda %s (A: %.6f -> %.6f)", reg.lambdas, losses[0], losses[-1])
    return HyperlearnResult(reg.lambdas, lambdas, losses)


def run_attack(
    clean: Dataset,
    val: Dataset,
    spec: ModelSpec,
    reg_template: RegSpec,
    config: AttackConfig,
    learn_lambda: Optional[bool] = None,
    init_scheme: Optional[InitScheme] = None,
    callback: Optional[Callable[[StepEvent], None]] = None,
    hypergrad_fn: HypergradFn = rmd_hypergrad,
) -> AttackResult:
    """Cumulative multi-fraction attack.

    For every fraction increment, new batches of ``min(poison_batch,
    increment)`` points are drawn from the rows not yet poisoned and each is
    optimized for ``T_mul`` hyperiterations. When lambda is learned, the 0%
    entry holds lambda learned on the clean data.

    ``learn_lambda`` defaults to ``config.learn_lambda``; with it off the
    lambdas of ``reg_template`` stay fixed.
    """
    learn = config.learn_lambda if learn_lambda is None else learn_lambda
    learn = learn and reg_template.active
    scheme = init_scheme or default_init_scheme(spec)
    rng = RngStream(config.seed, "attack")
    counts = poison_counts(clean.n, config.fraction_schedule)
    if counts[-1] >= clean.n:
        raise ConfigError("fraction schedule leaves no clean rows", key="attack.fraction_schedule")

    result = AttackResult()
    train = clean
    used = np.zeros(0, np.int64)
    base_reg = initial_reg(reg_template, config) if learn else reg_template
    reg = base_reg
    n_batches = 0
    prev = 0
    for fraction, count in zip(config.fraction_schedule, counts):
        started = time.perf_counter()
        batches: list[PoisonSet] = []
        trajectory: list[float] = []
        if count == 0 and learn:
            learned = run_hyperlearn(
                train,
                val,
                spec,
                reg_template,
                config,
                scheme,
                rng.derive("clean"),
                callback,
                hypergrad_fn,
            )
            reg = reg_template.with_lambdas(learned.lambdas)
            trajectory = learned.val_loss
        for size in _batch_sizes(count - prev, config.poison_batch):
            tag = f"batch{n_batches}"
            n_batches += 1
            logger.info("Optimizing %d poisons (fraction %.3f)", size, fraction)
            poison = init_poison(train, size, rng.derive(f"{tag}/init"), exclude=used)
            train = poison.apply(train)
            reg = base_reg
            trajectory = []
            for it in range(config.T_mul):
                w0 = fresh_w0(spec, scheme, rng, f"{tag}/w0/{it}")
                out = attack_step(
                    spec,
                    train,
                    poison,
                    reg,
                    val,
                    config,
                    w0,
                    learn_lambda=learn,
                    hypergrad_fn=hypergrad_fn,
                )
                poison, reg, train = out.poison, out.reg, out.train
                trajectory.append(out.info.val_loss)
                if callback is not None:
                    callback(StepEvent(fraction, n_batches - 1, it, poison, reg, out.info))
            used = np.concatenate([used, poison.indices])
            batches.append(poison)
        result.fractions.append(
            FractionResult(
                fraction=fraction,
                n_poison=count,
                batches=batches,
                lambdas=reg.lambdas,
                val_loss=trajectory,
                wall_time=time.perf_counter() - started,
                poisoned=train,
            )
        )
        prev = count
        logger.info("Fraction %.3f done: %d poisons, lambda=%s", fraction, count, reg.lambdas)
    return result
