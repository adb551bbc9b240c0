"""Parameter initialization and full-batch gradient descent."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from hyperpoison.core.exceptions import NumericalError
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.models.objective import grad_w, loss
from hyperpoison.models.spec import ModelSpec, ParamVector, RegSpec, layout_for

logger = logging.getLogger(__name__)

XAVIER_BIAS = 1e-2

InitScheme = Literal["zeros", "xavier"]


@dataclass(frozen=True)
class TrainTrace:
    """Parameter states ``w(0..T)`` of one unrolled training run."""

    states: list[ParamVector]
    eta: float
    spec: ModelSpec
    data: Dataset
    reg: RegSpec

    @property
    def T(self) -> int:
        return len(self.states) - 1


def init_params(
    spec: ModelSpec,
    scheme: InitScheme = "zeros",
    rng: Optional[RngStream | int] = None,
) -> ParamVector:
    """Zero or Xavier-uniform initialization.

    Xavier draws each weight from ``U(-b, b)`` with
    ``b = sqrt(6 / (fan_in + fan_out))`` and sets every bias to ``1e-2``.
    """
    layout = layout_for(spec)
    data = np.zeros(layout.size)
    if scheme == "zeros":
        return ParamVector(data, layout)
    if scheme != "xavier":
        raise ValueError(f"Unknown init scheme: {scheme}")
    if rng is None:
        raise ValueError("xavier initialization needs a seed or RngStream")
    stream = rng if isinstance(rng, RngStream) else RngStream(rng, "xavier")
    for span in layout.layers:
        fan_in, fan_out = span.shape
        bound = float(np.sqrt(6.0 / (fan_in + fan_out)))
        data[span.weight] = stream.uniform(-bound, bound, fan_in * fan_out)
        if span.bias is not None:
            data[span.bias] = XAVIER_BIAS
    return ParamVector(data, layout)


def default_init_scheme(spec: ModelSpec) -> InitScheme:
    """Linear models start from zeros, networks from Xavier."""
    return "xavier" if spec.kind == "mlp" else "zeros"


def sgd_train(
    spec: ModelSpec,
    data: Dataset,
    reg: RegSpec,
    w0: ParamVector,
    eta: float,
    T: int,
    record_trace: bool = False,
) -> tuple[ParamVector, Optional[TrainTrace]]:
    """Run ``T`` full-batch steps ``w <- w - eta * grad_w L(w)``.

    Raises:
        NumericalError: if a gradient becomes non-finite, ``iteration`` being
            the step at which it happened, or if the training loss of the
            final iterate is non-finite (``iteration == T``).
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    w = w0
    states = [w0] if record_trace else []
    for t in range(T):
        g = grad_w(spec, w, data, reg, include_reg=True).data
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite training gradient", phase="train", iteration=t)
        w = w.replace(w.data - eta * g)
        if record_trace:
            states.append(w)
    final_loss = loss(spec, w, data, reg)
    if not np.isfinite(final_loss):
        raise NumericalError(
            f"non-finite training loss {final_loss}", phase="train", iteration=T
        )
    trace = TrainTrace(states, eta, spec, data, reg) if record_trace else None
    return w, trace


def fit(
    spec: ModelSpec,
    data: Dataset,
    reg: RegSpec,
    eta: float,
    epochs: int,
    scheme: Optional[InitScheme] = None,
    rng: Optional[RngStream | int] = None,
) -> ParamVector:
    """Train from a fresh initialization; ``scheme`` defaults per model kind."""
    w0 = init_params(spec, scheme or default_init_scheme(spec), rng)
    w, _ = sgd_train(spec, data, reg, w0, eta, epochs)
    return w
