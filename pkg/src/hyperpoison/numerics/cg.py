"""Conjugate gradient for symmetric positive-definite operators."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from hyperpoison.core.exceptions import NumericalError

logger = logging.getLogger(__name__)

LinearOperator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CGResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float


def conjugate_gradient(
    apply_A: LinearOperator,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iters: Optional[int] = None,
    damping: float = 0.0,
) -> CGResult:
    """Solve ``(A + damping*I) x = b`` by conjugate gradient.

    Stops once ``||r|| <= tol * ||b||``. After ``max_iters`` (default
    ``10 * len(b)``) the best iterate seen so far is returned with
    ``converged=False``.

    Raises:
        NumericalError: on non-finite values or a non-positive curvature
            ``p' A p``, both of which mean the operator is not SPD.
    """
    if damping < 0:
        raise ValueError("damping must be >= 0")
    b = np.asarray(b, dtype=np.float64)
    if not np.all(np.isfinite(b)):
        raise NumericalError("right-hand side is not finite", phase="cg")
    n = b.size
    if max_iters is None:
        max_iters = 10 * max(n, 1)

    def op(v: np.ndarray) -> np.ndarray:
        out = np.asarray(apply_A(v), dtype=np.float64)
        return out + damping * v if damping else out

    b_norm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return CGResult(x=x, converged=True, iterations=0, residual_norm=0.0)

    target = tol * b_norm
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    best_x, best_res = x.copy(), float(np.sqrt(rs))

    for it in range(1, max_iters + 1):
        Ap = op(p)
        curvature = float(p @ Ap)
        if not np.isfinite(curvature):
            raise NumericalError("non-finite operator output", phase="cg", iteration=it)
        if curvature <= 0.0:
            raise NumericalError(
                f"operator is not positive definite (p'Ap = {curvature:.3e})",
                phase="cg",
                iteration=it,
            )
        step = rs / curvature
        x = x + step * p
        r = r - step * Ap
        rs_new = float(r @ r)
        res = float(np.sqrt(rs_new))
        if not np.isfinite(res):
            raise NumericalError("non-finite residual", phase="cg", iteration=it)
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= target:
            logger.debug("CG converged in %d iterations (residual %.3e)", it, res)
            return CGResult(x=x, converged=True, iterations=it, residual_norm=res)
        p = r + (rs_new / rs) * p
        rs = rs_new

    logger.warning(
        "CG did not converge after %d iterations (residual %.3e, target %.3e)",
        max_iters,
        best_res,
        target,
    )
    return CGResult(x=best_x, converged=False, iterations=max_iters, residual_norm=best_res)
