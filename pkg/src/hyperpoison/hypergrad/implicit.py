"""Implicit-function hypergradients at a stationary inner solution."""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from hyperpoison.core.config import CGConfig
from hyperpoison.core.exceptions import ConvergenceError
from hyperpoison.data.dataset import Dataset
from hyperpoison.hypergrad.base import Hypergrad, outer_direct_lambda, outer_grad
from hyperpoison.models.objective import grad_w, hvp_w, mixed_hvp_lambda, mixed_hvp_poison
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec
from hyperpoison.numerics.cg import conjugate_gradient

logger = logging.getLogger(__name__)


def stationarity_tolerance(
    spec: ModelSpec, train: Dataset, reg: RegSpec, w0: Optional[ParamVector] = None
) -> float:
    """``1e-6 * (1 + ||grad L(w0)||)`` with ``w0`` defaulting to zeros."""
    if w0 is None:
        w0 = ParamVector.zeros(spec)
    return 1e-6 * (1.0 + float(np.linalg.norm(grad_w(spec, w0, train, reg).data)))


def implicit_hypergrad(
    spec: ModelSpec,
    train_poisoned: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    reg: RegSpec,
    val: Dataset,
    w_star: ParamVector,
    cg_config: Optional[CGConfig] = None,
    include_reg_outer: bool = False,
    stationarity_tol: Optional[float] = None,
) -> Hypergrad:
    """Solve ``H v = grad_w A`` by CG and return ``-(mixed products)^T v``.

    Raises:
        ConvergenceError: if ``w_star`` is not stationary, or if CG fails and
            ``cg_config.strict`` is set. Otherwise a CG failure is reported in
            ``diagnostics["cg_converged"]``.
    """
    cfg = cg_config or CGConfig()
    tol = stationarity_tol
    if tol is None:
        tol = stationarity_tolerance(spec, train_poisoned, reg)
    g_norm = float(np.linalg.norm(grad_w(spec, w_star, train_poisoned, reg).data))
    if g_norm > tol:
        raise ConvergenceError(
            f"inner solution is not stationary: |grad L| = {g_norm:.3e} > {tol:.3e}"
        )

    rhs = outer_grad(spec, w_star, val, reg, include_reg_outer)

    def apply_H(x: np.ndarray) -> np.ndarray:
        return hvp_w(spec, w_star, train_poisoned, reg, w_star.replace(x)).data

    res = conjugate_gradient(
        apply_H, rhs.data, tol=cfg.tol, max_iters=cfg.max_iters, damping=cfg.damping
    )
    if not res.converged and cfg.strict:
        raise ConvergenceError(
            f"CG stopped after {res.iterations} iterations, residual {res.residual_norm:.3e}"
        )
    v = w_star.replace(res.x)
    d_poison = -mixed_hvp_poison(spec, w_star, train_poisoned, poison_rows, v)
    d_lambda = np.zeros(0)
    if reg.active:
        d_lambda = -mixed_hvp_lambda(spec, w_star, reg, v)
        d_lambda = d_lambda + outer_direct_lambda(w_star, reg, include_reg_outer)
    logger.debug("implicit hypergradient: CG %d iterations", res.iterations)
    return Hypergrad(
        d_poison,
        d_lambda,
        engine="implicit",
        T_used=0,
        diagnostics={"cg_converged": res.converged, "cg_iterations": res.iterations},
    )
