"""Model and regularization specifications, parameter layout."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hyperpoison.core.exceptions import ShapeError

NormName = Literal["none", "l2", "l1"]
Grouping = Literal["single", "per-layer"]


class ModelSpec(BaseModel):
    """Architecture of a binary classifier.

    ``layer_sizes`` runs from the input width to the single output unit.
    Kind-specific rules (e.g. logistic regression has no hidden layer) are
    enforced by the registered model class.
    """

    model_config = ConfigDict(frozen=True)

    kind: str = "lr"
    layer_sizes: tuple[int, ...] = Field(min_length=2)
    leaky_slope: float = 0.01
    bias: bool = True
    reduction: Literal["sequential", "blas"] = "sequential"

    @field_validator("layer_sizes")
    @classmethod
    def _positive_sizes(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(s < 1 for s in v):
            raise ValueError("layer sizes must be positive")
        if v[-1] != 1:
            raise ValueError("output layer must have exactly one unit (binary tasks)")
        return v

    @field_validator("leaky_slope")
    @classmethod
    def _slope_range(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("leaky_slope must lie in (0, 1)")
        return v

    @model_validator(mode="after")
    def _kind_rules(self) -> ModelSpec:
        from hyperpoison.models.registry import get_model

        get_model(self.kind).validate_spec(self)
        return self

    @property
    def n_features(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1


class RegSpec(BaseModel):
    """Penalty ``sum_g exp(lambda_g) * pen(w_g)``; ``norm="none"`` disables it."""

    model_config = ConfigDict(frozen=True)

    norm: NormName = "none"
    grouping: Grouping = "single"
    lambdas: tuple[float, ...] = ()
    include_bias: bool = False

    @model_validator(mode="after")
    def _check(self) -> RegSpec:
        if self.norm == "none" and self.lambdas:
            raise ValueError("norm 'none' takes no lambdas")
        if self.norm != "none" and not self.lambdas:
            raise ValueError(f"norm '{self.norm}' needs at least one lambda")
        if not all(math.isfinite(v) for v in self.lambdas):
            raise ValueError("lambdas must be finite (use norm='none' for no penalty)")
        return self

    @property
    def h(self) -> int:
        return len(self.lambdas)

    @property
    def active(self) -> bool:
        return self.norm != "none"

    def with_lambdas(self, lambdas: np.ndarray | tuple[float, ...]) -> RegSpec:
        return self.model_copy(update={"lambdas": tuple(float(v) for v in lambdas)})

    def lambda_array(self) -> np.ndarray:
        return np.asarray(self.lambdas, dtype=np.float64)


@dataclass(frozen=True)
class LayerSpan:
    """Location of one layer's weight matrix and bias inside the flat vector."""

    weight: slice
    bias: Optional[slice]
    shape: tuple[int, int]

    @property
    def size(self) -> int:
        n = self.shape[0] * self.shape[1]
        return n + (self.shape[1] if self.bias is not None else 0)


@dataclass(frozen=True, eq=False)
class Layout:
    """Per-layer spans; one shared instance per architecture (hashed by identity)."""

    layers: tuple[LayerSpan, ...]
    size: int

    def weight(self, data: np.ndarray, layer: int) -> np.ndarray:
        span = self.layers[layer]
        return data[span.weight].reshape(span.shape)

    def bias(self, data: np.ndarray, layer: int) -> Optional[np.ndarray]:
        span = self.layers[layer]
        return None if span.bias is None else data[span.bias]

    def layer_indices(self, layer: int, include_bias: bool = True) -> np.ndarray:
        span = self.layers[layer]
        idx = np.arange(span.weight.start, span.weight.stop)
        if include_bias and span.bias is not None:
            idx = np.concatenate([idx, np.arange(span.bias.start, span.bias.stop)])
        return idx


@lru_cache(maxsize=64)
def _build_layout(layer_sizes: tuple[int, ...], bias: bool) -> Layout:
    spans: list[LayerSpan] = []
    offset = 0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        w = slice(offset, offset + fan_in * fan_out)
        offset = w.stop
        b: Optional[slice] = None
        if bias:
            b = slice(offset, offset + fan_out)
            offset = b.stop
        spans.append(LayerSpan(weight=w, bias=b, shape=(fan_in, fan_out)))
    return Layout(layers=tuple(spans), size=offset)


def layout_for(spec: ModelSpec) -> Layout:
    """Weights row-major ``(fan_in, fan_out)`` then bias, layer by layer."""
    return _build_layout(tuple(spec.layer_sizes), spec.bias)


@dataclass(frozen=True)
class ParamVector:
    """Flat parameter vector together with its per-layer layout."""

    data: np.ndarray
    layout: Layout

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64).ravel()
        if data.size != self.layout.size:
            raise ShapeError(
                f"parameter vector has {data.size} entries, layout needs {self.layout.size}"
            )
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, spec: ModelSpec) -> ParamVector:
        layout = layout_for(spec)
        return cls(np.zeros(layout.size), layout)

    def replace(self, data: np.ndarray) -> ParamVector:
        return ParamVector(data, self.layout)

    def weight(self, layer: int) -> np.ndarray:
        return self.layout.weight(self.data, layer)

    def bias(self, layer: int) -> Optional[np.ndarray]:
        return self.layout.bias(self.data, layer)

    def __len__(self) -> int:
        return int(self.data.size)
