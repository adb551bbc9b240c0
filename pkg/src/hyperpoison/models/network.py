"""Feed-forward sigmoid classifiers with exact first and second-order passes.

Layer ``l`` computes ``z_l = a_{l-1} W_l + b_l``; hidden layers apply a
leaky ReLU, the single output unit is a logit trained with binary
cross-entropy. Second-order products use the forward-over-reverse scheme:
the forward pass carries tangents ``z_dot`` alongside ``z``, and a reverse
sweep over that joint computation yields both the Hessian-vector product
and the mixed feature/parameter product. Leaky ReLU is piecewise linear, so
its second derivative is zero almost everywhere.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from hyperpoison.models.base import BaseClassifier
from hyperpoison.models.spec import Layout, ModelSpec, layout_for
from hyperpoison.numerics.linalg import matmul


def sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def bce_with_logits(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample ``max(z, 0) - z*y + log(1 + exp(-|z|))``."""
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))


class _Forward:
    """Cached forward pass: pre-activations, activations, activation slopes."""

    def __init__(
        self,
        spec: ModelSpec,
        layout: Layout,
        w: np.ndarray,
        X: np.ndarray,
    ) -> None:
        self.weights: list[np.ndarray] = []
        self.biases: list[Optional[np.ndarray]] = []
        self.acts: list[np.ndarray] = [X]
        self.slopes: list[np.ndarray] = []
        n_layers = len(layout.layers)
        for layer in range(n_layers):
            W = layout.weight(w, layer)
            b = layout.bias(w, layer)
            self.weights.append(W)
            self.biases.append(b)
            z = matmul(self.acts[-1], W, spec.reduction)
            if b is not None:
                z = z + b
            if layer < n_layers - 1:
                slope = np.where(z > 0, 1.0, spec.leaky_slope)
                self.slopes.append(slope)
                self.acts.append(z * slope)
            else:
                self.logits = z[:, 0]


class FeedForwardNetwork(BaseClassifier):
    """Shared implementation for logistic regression and leaky-ReLU MLPs."""

    def logits(self, spec: ModelSpec, w: np.ndarray, X: np.ndarray) -> np.ndarray:
        return _Forward(spec, layout_for(spec), w, X).logits

    def data_loss(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> float:
        z = self.logits(spec, w, X)
        return float(scale * np.sum(bce_with_logits(z, y)))

    def data_grad(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> np.ndarray:
        layout = layout_for(spec)
        fwd = _Forward(spec, layout, w, X)
        grad = np.zeros(layout.size)
        delta = (scale * (sigmoid(fwd.logits) - y))[:, None]
        for layer in range(len(layout.layers) - 1, -1, -1):
            span = layout.layers[layer]
            a_prev = fwd.acts[layer]
            grad[span.weight] = matmul(a_prev.T, delta, spec.reduction).ravel()
            if span.bias is not None:
                grad[span.bias] = delta.sum(axis=0)
            if layer > 0:
                delta = matmul(delta, fwd.weights[layer].T, spec.reduction)
                delta = delta * fwd.slopes[layer - 1]
        return grad

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
        layout = layout_for(spec)
        mm = spec.reduction
        fwd = _Forward(spec, layout, w, X)
        n_layers = len(layout.layers)

        # Tangent sweep: a_dot[l] is the directional derivative of acts[l].
        # None stands for an all-zero tangent.
        a_dot: list[Optional[np.ndarray]] = [
            None if x_dot is None else np.asarray(x_dot, dtype=np.float64)
        ]
        V: list[Optional[np.ndarray]] = []
        for layer in range(n_layers):
            Vl = None if v is None else layout.weight(v, layer)
            cl = None if v is None else layout.bias(v, layer)
            V.append(Vl)
            z_dot = np.zeros((X.shape[0], layout.layers[layer].shape[1]))
            a_prev_dot = a_dot[layer]
            if a_prev_dot is not None:
                z_dot = z_dot + matmul(a_prev_dot, fwd.weights[layer], mm)
            if Vl is not None:
                z_dot = z_dot + matmul(fwd.acts[layer], Vl, mm)
            if cl is not None:
                z_dot = z_dot + cl
            if layer < n_layers - 1:
                a_dot.append(z_dot * fwd.slopes[layer])

        # Adjoints of R = scale * sum(l'(z) z_dot) w.r.t. z (g_bar) and z_dot (g_dot).
        p = sigmoid(fwd.logits)
        g_bar = (scale * p * (1.0 - p))[:, None] * z_dot
        g_dot = (scale * (p - y))[:, None]

        grad_w = np.zeros(layout.size)
        grad_x = np.zeros_like(X)
        for layer in range(n_layers - 1, -1, -1):
            span = layout.layers[layer]
            W = fwd.weights[layer]
            gW = matmul(fwd.acts[layer].T, g_bar, mm)
            a_prev_dot = a_dot[layer]
            if a_prev_dot is not None:
                gW = gW + matmul(a_prev_dot.T, g_dot, mm)
            grad_w[span.weight] = gW.ravel()
            if span.bias is not None:
                grad_w[span.bias] = g_bar.sum(axis=0)
            d_act = matmul(g_bar, W.T, mm)
            Vl = V[layer]
            if Vl is not None:
                d_act = d_act + matmul(g_dot, Vl.T, mm)
            if layer > 0:
                slope = fwd.slopes[layer - 1]
                g_bar = d_act * slope
                g_dot = matmul(g_dot, W.T, mm) * slope
            else:
                grad_x = d_act
        return grad_w, grad_x
