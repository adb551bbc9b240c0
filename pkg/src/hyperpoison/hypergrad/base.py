"""Hypergradient container and the validation objective."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hyperpoison.data.dataset import Dataset
from hyperpoison.models import regularization as regz
from hyperpoison.models.objective import grad_w, loss
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec


@dataclass(frozen=True)
class Hypergrad:
    """Derivatives of the validation objective w.r.t. the outer variables."""

    d_poison: np.ndarray
    d_lambda: np.ndarray
    engine: str
    T_used: int
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.d_poison.ravel(), self.d_lambda.ravel()])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flat())))

    def scaled(self, c: float) -> Hypergrad:
        return Hypergrad(c * self.d_poison, c * self.d_lambda, self.engine, self.T_used)


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-12) -> float:
    """``max|a - b| / max(max|a|, max|b|, floor)``."""
    a = np.ravel(a)
    b = np.ravel(b)
    if a.size == 0 and b.size == 0:
        return 0.0
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b))) / max(scale, floor)


def outer_value(
    spec: ModelSpec, w: ParamVector, val: Dataset, reg: RegSpec, include_reg: bool = False
) -> float:
    """Validation objective ``A(w)``; the penalty is excluded by default."""
    return loss(spec, w, val, reg, include_reg=include_reg)


def outer_grad(
    spec: ModelSpec, w: ParamVector, val: Dataset, reg: RegSpec, include_reg: bool = False
) -> ParamVector:
    return grad_w(spec, w, val, reg, include_reg=include_reg)


def outer_direct_lambda(w: ParamVector, reg: RegSpec, include_reg: bool) -> np.ndarray:
    """Explicit ``dA/dlambda`` when the penalty is part of ``A``."""
    if not reg.active:
        return np.zeros(0)
    if not include_reg:
        return np.zeros(reg.h)
    return np.exp(reg.lambda_array()) * regz.group_penalties(w.data, w.layout, reg)
