"""Location model with squared loss.

The data loss is ``scale * sum_i 0.5 * ||w - x_i||^2``; labels are ignored.
Its hypergradients have closed forms, which makes it the reference problem
for the gradient-check suite. Scores for prediction are ``x . w``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from hyperpoison.models.base import BaseClassifier
from hyperpoison.models.registry import register_model
from hyperpoison.models.spec import ModelSpec


class QuadraticModel(BaseClassifier):
    @property
    def name(self) -> str:
        return "quadratic"

    @property
    def description(self) -> str:
        return "Squared distance to the training points (closed-form reference)"

    def validate_spec(self, spec: ModelSpec) -> None:
        if len(spec.layer_sizes) != 2 or spec.bias:
            raise ValueError("quadratic model takes layer_sizes [m, 1] and bias=False")

    def logits(self, spec: ModelSpec, w: np.ndarray, X: np.ndarray) -> np.ndarray:
        return X @ w

    def data_loss(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> float:
        diff = X - w[None, :]
        return float(scale * 0.5 * np.sum(diff * diff))

    def data_grad(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> np.ndarray:
        return scale * np.sum(w[None, :] - X, axis=0)

    def second_order(
        self,
        spec: ModelSpec,
        w: np.ndarray,
        X: np.ndarray,
        y: np.ndarray,
        scale: float,
        v: Optional[np.ndarray] = None,
        x_dot: Optional[np.ndarray] = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        # R = scale * sum_i (w - x_i) . (v - x_dot_i)
        tangent = np.zeros_like(X)
        if v is not None:
            tangent = tangent + v[None, :]
        if x_dot is not None:
            tangent = tangent - x_dot
        return scale * np.sum(tangent, axis=0), -scale * tangent


register_model(QuadraticModel())
