"""Reverse-mode hypergradients through unrolled gradient descent."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from hyperpoison.core.exceptions import NumericalError
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, outer_direct_lambda, outer_grad
from hyperpoison.models.objective import hvp_w, mixed_hvp_lambda, mixed_hvp_poison
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.models.training import TrainTrace, sgd_train

logger = logging.getLogger(__name__)


def reverse_accumulate(
    trace: TrainTrace,
    seed: ParamVector,
    poison_rows: Sequence[int] | np.ndarray,
) -> Hypergrad:
    """Backward sweep over a recorded trace.

    Starting from ``dw = seed`` (the gradient of the outer objective at
    ``w(T)``), walks ``t = T-1 .. 0`` accumulating::

        dX   -= eta * (d/dX_p grad_w L(w_t))^T dw
        dlam -= eta * (d/dlambda grad_w L(w_t))^T dw
        dw    = dw - eta * H(w_t) dw

    The result is linear in ``seed``. Hessians are never formed.
    """
    spec, data, reg, eta = trace.spec, trace.data, trace.reg, trace.eta
    rows = np.asarray(poison_rows, dtype=np.int64)
    d_poison = np.zeros((rows.size, data.m))
    d_lambda = np.zeros(reg.h)
    dw = seed
    for t in range(trace.T - 1, -1, -1):
        w_t = trace.states[t]
        if rows.size:
            d_poison -= eta * mixed_hvp_poison(spec, w_t, data, rows, dw)
        if reg.active:
            d_lambda -= eta * mixed_hvp_lambda(spec, w_t, reg, dw)
        dw = dw.replace(dw.data - eta * hvp_w(spec, w_t, data, reg, dw).data)
        if not np.all(np.isfinite(dw.data)):
            raise NumericalError("non-finite adjoint", phase="backward", iteration=t)
    return Hypergrad(d_poison, d_lambda, engine="rmd", T_used=trace.T)


def rmd_hypergrad(
    spec: ModelSpec,
    train_poisoned: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    reg: RegSpec,
    val: Dataset,
    w0: ParamVector,
    eta: float,
    T: int,
    include_reg_outer: bool = False,
) -> tuple[Hypergrad, ParamVector]:
    """Exact hypergradients of ``A(w(T))`` by reverse-mode differentiation.

    Trains for ``T`` steps storing every state, seeds the adjoint with
    ``grad_w A(w(T))`` on ``val`` and runs :func:`reverse_accumulate`.

    Returns:
        The hypergradient and the final parameters ``w(T)``.
    """
    if T < 1:
        raise ValueError("RMD needs T >= 1")
    w_T, trace = sgd_train(spec, train_poisoned, reg, w0, eta, T, record_trace=True)
    assert trace is not None
    seed = outer_grad(spec, w_T, val, reg, include_reg_outer)
    hg = reverse_accumulate(trace, seed, poison_rows)
    if include_reg_outer and reg.active:
        hg = Hypergrad(
            hg.d_poison,
            hg.d_lambda + outer_direct_lambda(w_T, reg, True),
            hg.engine,
            hg.T_used,
        )
    if not hg.is_finite():
        raise NumericalError("non-finite hypergradient", phase="backward")
    logger.debug(
        "RMD T=%d |dX|=%.3e |dlam|=%.3e",
        T,
        float(np.linalg.norm(hg.d_poison)),
        float(np.linalg.norm(hg.d_lambda)),
    )
    return hg, w_T
