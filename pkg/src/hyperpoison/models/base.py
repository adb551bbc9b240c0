"""Base classifier interface."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:
    from hyperpoison.models.spec import ModelSpec


class BaseClassifier(ABC):
    """Abstract base class for differentiable binary classifiers.

    All methods work on the flat float64 parameter array laid out by
    :func:`hyperpoison.models.spec.layout_for`. Data losses are sums over the
    given rows multiplied by ``scale``; callers pass ``scale = 1 / n`` to get
    the mean over the full training set even when only a subset of rows is
    evaluated.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry key (``ModelSpec.kind``)."""

    @property
    @abstractmethod
    def description(self) -> str:
        """Human-readable description."""

    @abstractmethod
    def validate_spec(self, spec: ModelSpec) -> None:
        """Raise ``ValueError`` if ``spec`` is not a valid architecture."""

    @abstractmethod
    def logits(self, spec: ModelSpec, w: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Pre-sigmoid scores, shape ``(n,)``."""

    @abstractmethod
    def data_loss(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> float:
        """Unregularized loss summed over rows, times ``scale``."""

    @abstractmethod
    def data_grad(
        self, spec: ModelSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray, scale: float
    ) -> np.ndarray:
        """Gradient of :meth:`data_loss` in ``w``."""

    @abstractmethod
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
        """Gradients of the directional derivative ``R`` of the data loss.

        ``R`` is the derivative of the loss along ``v`` in parameter space
        and ``x_dot`` in feature space (either may be omitted as zero).
        Returns ``(dR/dw, dR/dX)``. With ``x_dot`` omitted the first entry is
        the Hessian-vector product and the second is the mixed product
        ``d/dX (v . grad_w L)``; with ``v`` omitted the first entry is the
        forward-mode mixed product ``d/de grad_w L(w, X + e * x_dot)``.
        """
