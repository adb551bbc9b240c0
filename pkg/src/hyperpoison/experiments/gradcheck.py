"""Hypergradient check suite.

Closed-form scalar problems pin the engines to exact values; random logistic
regression and MLP instances compare reverse mode against finite
differences, forward mode and the implicit solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from hyperpoison.core.config import CGConfig
from hyperpoison.core.records import CheckRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, relative_error
from hyperpoison.hypergrad.finite_diff import fd_hypergrad
from hyperpoison.hypergrad.fmd import fmd_hypergrad
from hyperpoison.hypergrad.implicit import implicit_hypergrad
from hyperpoison.hypergrad.rmd import rmd_hypergrad
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.models.training import init_params, sgd_train

logger = logging.getLogger(__name__)

Corruption = Callable[[Hypergrad], Hypergrad]

TOY_SPEC = ModelSpec(kind="quadratic", layer_sizes=(1, 1), bias=False)
TOY_VAL = Dataset(np.zeros((1, 1)), np.zeros(1))

LR_FD_TOL = 1e-5
MLP_FD_TOL = 1e-4
FMD_TOL = 1e-10
IMPLICIT_TOL = 1e-3
TOY_TOL = 1e-10


@dataclass(frozen=True)
class Instance:
    spec: ModelSpec
    train: Dataset
    val: Dataset
    rows: np.ndarray
    reg: RegSpec
    w0: ParamVector
    eta: float
    T: int


def _toy_point(x: float) -> Dataset:
    return Dataset(np.array([[x]]), np.zeros(1))


def toy_values(
    corrupt: Optional[Corruption] = None, cg: Optional[CGConfig] = None
) -> list[tuple[str, float, float]]:
    """``(name, computed, expected)`` for the four closed-form problems."""
    fix = corrupt or (lambda hg: hg)
    w0 = ParamVector.zeros(TOY_SPEC)
    out = []

    # L = 0.5 (w - x_p)^2, eta 0.5, one step, x_p = 2
    hg, _ = rmd_hypergrad(TOY_SPEC, _toy_point(2.0), [0], RegSpec(), TOY_VAL, w0, 0.5, 1)
    out.append(("toy/rmd/poison", float(fix(hg).d_poison[0, 0]), 0.5))

    # L = 0.5 (w - 1)^2 + 0.5 e^lambda w^2, eta 1, two steps, lambda = ln 0.5
    reg = RegSpec(norm="l2", lambdas=(math.log(0.5),))
    hg, _ = rmd_hypergrad(TOY_SPEC, _toy_point(1.0), [], reg, TOY_VAL, w0, 1.0, 2)
    out.append(("toy/rmd/lambda", float(fix(hg).d_lambda[0]), -0.25))

    # Stationary point w* = x_p / (1 + e^lambda) = 1 at x_p = 2, lambda = 0
    reg0 = RegSpec(norm="l2", lambdas=(0.0,))
    w_star = w0.replace(np.array([1.0]))
    hg = fix(implicit_hypergrad(TOY_SPEC, _toy_point(2.0), [0], reg0, TOY_VAL, w_star, cg))
    out.append(("toy/implicit/poison", float(hg.d_poison[0, 0]), 0.5))
    out.append(("toy/implicit/lambda", float(hg.d_lambda[0]), -0.5))
    return out


def random_instance(rng: RngStream, kind: str = "lr") -> Instance:
    gen = rng.generator
    n = int(gen.integers(10, 31))
    if kind == "lr":
        m = int(gen.integers(2, 6))
        spec = ModelSpec(kind="lr", layer_sizes=(m, 1))
        T = int(gen.integers(20, 61))
    else:
        m = int(gen.integers(2, 7))
        spec = ModelSpec(kind="mlp", layer_sizes=(m, int(gen.integers(2, 5)), 1))
        T = int(gen.integers(10, 31))
    X = gen.uniform(-1.0, 1.0, (n, m))
    y = np.arange(n) % 2
    val_X = gen.uniform(-1.0, 1.0, (12, m))
    val_y = np.arange(12) % 2
    n_p = int(gen.integers(1, 4))
    rows = np.sort(gen.choice(n, n_p, replace=False)).astype(np.int64)
    y = y.astype(np.float64)
    y[rows] = 1.0 - y[rows]
    reg = RegSpec()
    if gen.uniform() < 0.7:
        reg = RegSpec(norm="l2", lambdas=(float(gen.uniform(-3.0, 0.0)),))
    if kind == "lr":
        w0 = init_params(spec, "zeros")
    else:
        w0 = init_params(spec, "xavier", rng.derive("w0"))
    return Instance(
        spec, Dataset(X, y), Dataset(val_X, val_y), rows, reg, w0, float(gen.uniform(0.1, 0.5)), T
    )


def _rmd(inst: Instance, corrupt: Optional[Corruption]) -> Hypergrad:
    hg, _ = rmd_hypergrad(
        inst.spec, inst.train, inst.rows, inst.reg, inst.val, inst.w0, inst.eta, inst.T
    )
    return corrupt(hg) if corrupt else hg


def fd_check(inst: Instance, corrupt: Optional[Corruption] = None) -> float:
    hg = _rmd(inst, corrupt)
    ref = fd_hypergrad(
        inst.spec, inst.train, inst.rows, inst.reg, inst.val, inst.w0, inst.eta, inst.T
    )
    return relative_error(hg.flat(), ref.flat())


def fmd_check(inst: Instance, corrupt: Optional[Corruption] = None) -> float:
    hg = _rmd(inst, corrupt)
    ref = fmd_hypergrad(
        inst.spec, inst.train, inst.rows, inst.reg, inst.val, inst.w0, inst.eta, inst.T
    )
    return relative_error(hg.flat(), ref.flat())


def implicit_check(
    rng: RngStream, corrupt: Optional[Corruption] = None, cg: Optional[CGConfig] = None
) -> float:
    """Long-horizon reverse mode vs the implicit solver on strongly convex LR + L2."""
    gen = rng.generator
    n, m = 20, 3
    spec = ModelSpec(kind="lr", layer_sizes=(m, 1))
    X = gen.uniform(-1.0, 1.0, (n, m))
    y = (np.arange(n) % 2).astype(np.float64)
    rows = np.array([0, 1])
    train = Dataset(X, y)
    val = Dataset(gen.uniform(-1.0, 1.0, (12, m)), np.arange(12) % 2)
    reg = RegSpec(norm="l2", lambdas=(0.0,))
    w0 = init_params(spec, "zeros")
    eta, T = 0.5, 200
    hg = _rmd(Instance(spec, train, val, rows, reg, w0, eta, T), corrupt)
    w_star, _ = sgd_train(spec, train, reg, w0, eta, T)
    ref = implicit_hypergrad(spec, train, rows, reg, val, w_star, cg)
    return relative_error(hg.flat(), ref.flat())


def run_gradient_checks(
    n_lr: int = 20,
    n_mlp: int = 10,
    seed: int = 0,
    corrupt: Optional[Corruption] = None,
    cg: Optional[CGConfig] = None,
) -> list[CheckRecord]:
    """Run every check; ``corrupt`` perturbs the engine output (negative control).

    ``cg`` configures the solver of the implicit engine.
    """
    records: list[CheckRecord] = []

    def add(name: str, err: float, tol: float) -> None:
        ok = bool(np.isfinite(err) and err <= tol)
        records.append(CheckRecord(name=name, max_rel_error=err, tolerance=tol, passed=ok))
        log = logger.debug if ok else logger.warning
        log("%s: max relative error %.3e (tol %.0e)", name, err, tol)

    for name, got, expected in toy_values(corrupt, cg):
        add(name, abs(got - expected) / max(abs(expected), 1e-12), TOY_TOL)

    rng = RngStream(seed, "gradcheck")
    fd_lr, fmd_lr, fd_mlp, fmd_mlp = [], [], [], []
    for i in range(n_lr):
        inst = random_instance(rng.derive(f"lr{i}"), "lr")
        fd_lr.append(fd_check(inst, corrupt))
        fmd_lr.append(fmd_check(inst, corrupt))
    for i in range(n_mlp):
        inst = random_instance(rng.derive(f"mlp{i}"), "mlp")
        fd_mlp.append(fd_check(inst, corrupt))
        fmd_mlp.append(fmd_check(inst, corrupt))
    if n_lr:
        add("lr/rmd-vs-fd", max(fd_lr), LR_FD_TOL)
        add("lr/rmd-vs-fmd", max(fmd_lr), FMD_TOL)
        implicit_err = implicit_check(rng.derive("implicit"), corrupt, cg)
        add("lr/rmd-vs-implicit", implicit_err, IMPLICIT_TOL)
    if n_mlp:
        add("mlp/rmd-vs-fd", max(fd_mlp), MLP_FD_TOL)
        add("mlp/rmd-vs-fmd", max(fmd_mlp), FMD_TOL)
    return records


def scale_corruption(factor: float = 1.01) -> Corruption:
    """Multiplies every hypergradient by ``factor``."""
    return lambda hg: hg.scaled(factor)
