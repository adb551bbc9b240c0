"""Central finite differences of the unrolled validation objective."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, outer_value
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.models.training import sgd_train

DEFAULT_STEP = 1e-5


def fd_hypergrad(
    spec: ModelSpec,
    train_poisoned: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    reg: RegSpec,
    val: Dataset,
    w0: ParamVector,
    eta: float,
    T: int,
    step: float = DEFAULT_STEP,
    include_reg_outer: bool = False,
) -> Hypergrad:
    """Retrain from ``w0`` for every perturbation of a poison feature or lambda."""
    rows = np.asarray(poison_rows, dtype=np.int64)
    # Perturbations may leave the feasible box; the oracle ignores bounds.
    base_X = train_poisoned.X
    y = train_poisoned.y

    def objective(X: np.ndarray, reg_: RegSpec) -> float:
        w_T, _ = sgd_train(spec, Dataset(X, y), reg_, w0, eta, T)
        return outer_value(spec, w_T, val, reg_, include_reg_outer)

    d_poison = np.zeros((rows.size, train_poisoned.m))
    for i, row in enumerate(rows):
        for j in range(train_poisoned.m):
            plus = base_X.copy()
            minus = base_X.copy()
            plus[row, j] += step
            minus[row, j] -= step
            d_poison[i, j] = (objective(plus, reg) - objective(minus, reg)) / (2 * step)

    d_lambda = np.zeros(reg.h)
    lambdas = reg.lambda_array()
    for g in range(reg.h):
        up, down = lambdas.copy(), lambdas.copy()
        up[g] += step
        down[g] -= step
        d_lambda[g] = (
            objective(base_X, reg.with_lambdas(up)) - objective(base_X, reg.with_lambdas(down))
        ) / (2 * step)
    return Hypergrad(d_poison, d_lambda, engine="fd", T_used=T)
