"""Parameter-norm diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperpoison.models.spec import ModelSpec, ParamVector


@dataclass(frozen=True)
class WeightNorms:
    per_layer: tuple[float, ...]
    total: float


def weight_norms(spec: ModelSpec, w: ParamVector) -> WeightNorms:
    """``||w_l||^2 / d_l`` per layer (bias included) and ``||w||^2 / d``."""
    if w.layout.size == 0:
        return WeightNorms((), 0.0)
    per_layer = []
    for layer in range(spec.n_layers):
        idx = w.layout.layer_indices(layer, include_bias=True)
        values = w.data[idx]
        per_layer.append(float(values @ values) / idx.size)
    return WeightNorms(tuple(per_layer), float(w.data @ w.data) / w.data.size)
