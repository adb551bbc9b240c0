"""L1 / L2 penalties with log-scale multipliers ``exp(lambda_g)``.

Group ``g`` is either every layer (``grouping="single"``) or layer ``g``
(``grouping="per-layer"``). Biases join a group only with
``include_bias=True``. L2 uses ``0.5 * ||w_g||^2``, L1 uses ``||w_g||_1``
with ``sign(0) = 0``; the L1 penalty has zero curvature almost everywhere.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from hyperpoison.core.exceptions import ShapeError
from hyperpoison.models.spec import Layout, RegSpec


@lru_cache(maxsize=64)
def _groups(layout: Layout, grouping: str, include_bias: bool) -> tuple[np.ndarray, ...]:
    per_layer = [
        layout.layer_indices(layer, include_bias) for layer in range(len(layout.layers))
    ]
    if grouping == "single":
        return (np.concatenate(per_layer),)
    return tuple(per_layer)


def group_indices(layout: Layout, reg: RegSpec) -> tuple[np.ndarray, ...]:
    """Flat parameter indices of every penalty group."""
    groups = _groups(layout, reg.grouping, reg.include_bias)
    if reg.active and len(groups) != reg.h:
        raise ShapeError(
            f"{reg.grouping} grouping has {len(groups)} groups but {reg.h} lambdas"
        )
    return groups


def _multipliers(reg: RegSpec) -> np.ndarray:
    return np.exp(reg.lambda_array())


def group_penalties(w: np.ndarray, layout: Layout, reg: RegSpec) -> np.ndarray:
    """``pen(w_g)`` per group, without the multiplier."""
    if not reg.active:
        return np.zeros(0)
    out = np.empty(reg.h)
    for g, idx in enumerate(group_indices(layout, reg)):
        wg = w[idx]
        out[g] = 0.5 * float(wg @ wg) if reg.norm == "l2" else float(np.abs(wg).sum())
    return out


def penalty(w: np.ndarray, layout: Layout, reg: RegSpec) -> float:
    if not reg.active:
        return 0.0
    return float(_multipliers(reg) @ group_penalties(w, layout, reg))


def penalty_grad(w: np.ndarray, layout: Layout, reg: RegSpec) -> np.ndarray:
    grad = np.zeros_like(w)
    if not reg.active:
        return grad
    for scale, idx in zip(_multipliers(reg), group_indices(layout, reg)):
        grad[idx] = scale * (w[idx] if reg.norm == "l2" else np.sign(w[idx]))
    return grad


def penalty_hvp(w: np.ndarray, layout: Layout, reg: RegSpec, v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    if reg.norm != "l2":
        return out
    for scale, idx in zip(_multipliers(reg), group_indices(layout, reg)):
        out[idx] = scale * v[idx]
    return out


def penalty_lambda_columns(w: np.ndarray, layout: Layout, reg: RegSpec) -> np.ndarray:
    """``d/dlambda_g`` of the penalty gradient, one column per group (d x h)."""
    cols = np.zeros((w.size, reg.h))
    for g, (scale, idx) in enumerate(zip(_multipliers(reg), group_indices(layout, reg))):
        cols[idx, g] = scale * (w[idx] if reg.norm == "l2" else np.sign(w[idx]))
    return cols


def penalty_mixed_lambda(
    w: np.ndarray, layout: Layout, reg: RegSpec, v: np.ndarray
) -> np.ndarray:
    """``(d/dlambda grad_w pen)^T v``, length ``h``."""
    out = np.zeros(reg.h)
    for g, (scale, idx) in enumerate(zip(_multipliers(reg), group_indices(layout, reg))):
        basis = w[idx] if reg.norm == "l2" else np.sign(w[idx])
        out[g] = scale * float(basis @ v[idx])
    return out
