"""Regularized training objective and its exact derivative products."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from hyperpoison.core.exceptions import ShapeError
from hyperpoison.data.dataset import Dataset
from hyperpoison.models import regularization as regz
from hyperpoison.models.network import sigmoid
from hyperpoison.models.registry import get_model
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec, layout_for


def _check(spec: ModelSpec, w: ParamVector, X: np.ndarray) -> None:
    expected = layout_for(spec).size
    if w.layout.size != expected:
        raise ShapeError(f"parameters have {w.layout.size} entries, model needs {expected}")
    if X.ndim != 2 or X.shape[1] != spec.n_features:
        raise ShapeError(f"model expects {spec.n_features} features, got shape {X.shape}")


def _rows(data: Dataset, rows: Sequence[int] | np.ndarray) -> np.ndarray:
    idx = np.asarray(rows, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= data.n):
        raise ShapeError(f"poison row index out of range for {data.n} training rows")
    return idx


def forward(spec: ModelSpec, w: ParamVector, X: np.ndarray) -> np.ndarray:
    """Class-1 probabilities per row."""
    X = np.asarray(X, dtype=np.float64)
    _check(spec, w, X)
    return sigmoid(get_model(spec.kind).logits(spec, w.data, X))


def loss(
    spec: ModelSpec,
    w: ParamVector,
    data: Dataset,
    reg: RegSpec,
    include_reg: bool = True,
) -> float:
    """Mean cross-entropy over rows, plus the penalty once if requested."""
    _check(spec, w, data.X)
    value = get_model(spec.kind).data_loss(spec, w.data, data.X, data.y, 1.0 / data.n)
    if include_reg and reg.active:
        value += regz.penalty(w.data, w.layout, reg)
    return value


def grad_w(
    spec: ModelSpec,
    w: ParamVector,
    data: Dataset,
    reg: RegSpec,
    include_reg: bool = True,
) -> ParamVector:
    _check(spec, w, data.X)
    grad = get_model(spec.kind).data_grad(spec, w.data, data.X, data.y, 1.0 / data.n)
    if include_reg and reg.active:
        grad = grad + regz.penalty_grad(w.data, w.layout, reg)
    return w.replace(grad)


def hvp_w(
    spec: ModelSpec, w: ParamVector, data: Dataset, reg: RegSpec, v: ParamVector
) -> ParamVector:
    """Exact ``(d^2 L / dw^2) v`` of the regularized training loss."""
    _check(spec, w, data.X)
    if v.layout.size != w.layout.size:
        raise ShapeError("v and w have different layouts")
    hv, _ = get_model(spec.kind).second_order(
        spec, w.data, data.X, data.y, 1.0 / data.n, v=v.data
    )
    if reg.active:
        hv = hv + regz.penalty_hvp(w.data, w.layout, reg, v.data)
    return w.replace(hv)


def mixed_hvp_poison(
    spec: ModelSpec,
    w: ParamVector,
    train: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    v: ParamVector,
) -> np.ndarray:
    """``d/dX_p (v . grad_w L)`` for the rows in ``poison_rows`` (n_p x m).

    The penalty does not depend on the features, and each row's loss depends
    only on that row, so only the poison rows are evaluated.
    """
    _check(spec, w, train.X)
    if v.layout.size != w.layout.size:
        raise ShapeError("v and w have different layouts")
    idx = _rows(train, poison_rows)
    if idx.size == 0:
        return np.zeros((0, train.m))
    _, gx = get_model(spec.kind).second_order(
        spec, w.data, train.X[idx], train.y[idx], 1.0 / train.n, v=v.data
    )
    return gx


def mixed_jvp_poison(
    spec: ModelSpec,
    w: ParamVector,
    train: Dataset,
    poison_rows: Sequence[int] | np.ndarray,
    x_dot: np.ndarray,
) -> np.ndarray:
    """Forward-mode ``d/de grad_w L(w, X_p + e * x_dot)``, length ``d``."""
    _check(spec, w, train.X)
    idx = _rows(train, poison_rows)
    if idx.size == 0:
        return np.zeros(w.layout.size)
    gw, _ = get_model(spec.kind).second_order(
        spec, w.data, train.X[idx], train.y[idx], 1.0 / train.n, x_dot=x_dot
    )
    return gw


def mixed_hvp_lambda(
    spec: ModelSpec, w: ParamVector, reg: RegSpec, v: ParamVector
) -> np.ndarray:
    """``(d/dlambda grad_w L)^T v``, one entry per penalty group."""
    if not reg.active:
        raise ValueError("mixed_hvp_lambda needs an active regularizer")
    return regz.penalty_mixed_lambda(w.data, w.layout, reg, v.data)
