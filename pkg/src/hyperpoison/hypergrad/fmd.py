"""Forward-mode hypergradients.

Propagates the Jacobian ``J_t = dw(t)/dz`` of the parameters w.r.t. the
outer variables ``z = (vec X_p, lambda)`` alongside training::

    J_{t+1} = J_t - eta * (H(w_t) J_t + d/dz grad_w L(w_t))

Cost grows with ``n_p * m + h`` Hessian-vector products per step, so the
engine is limited to small outer problems.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from hyperpoison.core.exceptions import ConfigError, NumericalError
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, outer_direct_lambda, outer_grad
from hyperpoison.models import regularization as regz
from hyperpoison.models.objective import grad_w, hvp_w, mixed_jvp_poison
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.numerics.linalg import matmul

DEFAULT_OUTER_DIM_CAP = 64


def fmd_hypergrad(
    spec: ModelSpec,
    train_poisoned: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    reg: RegSpec,
    val: Dataset,
    w0: ParamVector,
    eta: float,
    T: int,
    outer_dim_cap: int = DEFAULT_OUTER_DIM_CAP,
    include_reg_outer: bool = False,
) -> Hypergrad:
    rows = np.asarray(poison_rows, dtype=np.int64)
    n_p, m = rows.size, train_poisoned.m
    n_x = n_p * m
    K = n_x + reg.h
    if K > outer_dim_cap:
        raise ConfigError(
            f"{K} outer variables exceed the forward-mode cap of {outer_dim_cap}; "
            "use the reverse-mode engine",
            key="outer_dim_cap",
        )
    if T < 1:
        raise ValueError("FMD needs T >= 1")

    w = w0
    J = np.zeros((w0.layout.size, K))
    basis = np.zeros((n_p, m))
    for t in range(T):
        step = np.empty_like(J)
        for k in range(K):
            step[:, k] = hvp_w(spec, w, train_poisoned, reg, w.replace(J[:, k])).data
        for k in range(n_x):
            basis.flat[k] = 1.0
            step[:, k] += mixed_jvp_poison(spec, w, train_poisoned, rows, basis)
            basis.flat[k] = 0.0
        if reg.active:
            step[:, n_x:] += regz.penalty_lambda_columns(w.data, w.layout, reg)
        g = grad_w(spec, w, train_poisoned, reg).data
        J = J - eta * step
        w = w.replace(w.data - eta * g)
        if not np.all(np.isfinite(J)):
            raise NumericalError("non-finite tangent", phase="forward", iteration=t)

    g_out = outer_grad(spec, w, val, reg, include_reg_outer).data
    total = matmul(J.T, g_out[:, None], spec.reduction).ravel()
    d_lambda = total[n_x:] + outer_direct_lambda(w, reg, include_reg_outer)
    return Hypergrad(total[:n_x].reshape(n_p, m), d_lambda, engine="fmd", T_used=T)
