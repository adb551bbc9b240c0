"""Custom exceptions for hyperpoison."""

from __future__ import annotations

from typing import Optional


class HyperPoisonError(Exception):
    """Base exception for hyperpoison."""


class ConfigError(HyperPoisonError):
    """Error in configuration."""

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class DatasetError(HyperPoisonError):
    """Error loading, parsing or splitting a dataset."""


class ShapeError(HyperPoisonError, ValueError):
    """Dimension or parameter-layout mismatch."""


class NumericalError(HyperPoisonError):
    """A non-finite value appeared during a computation."""

    def __init__(
        self, message: str, phase: str = "", iteration: Optional[int] = None
    ) -> None:
        self.phase = phase
        self.iteration = iteration
        where = phase
        if iteration is not None:
            where = f"{phase} iteration {iteration}" if phase else f"iteration {iteration}"
        super().__init__(f"{message} ({where})" if where else message)


class ConvergenceError(HyperPoisonError):
    """An iterative solver did not reach its tolerance."""


class GradientCheckError(HyperPoisonError):
    """A gradient or hypergradient check exceeded its tolerance."""
