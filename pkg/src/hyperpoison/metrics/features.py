"""Top-k feature sets and Kuncheva's consistency index."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperpoison.models.spec import ParamVector


@dataclass(frozen=True)
class FeatureSet:
    """``k`` distinct feature indices out of ``universe_size``."""

    indices: tuple[int, ...]
    universe_size: int

    def __post_init__(self) -> None:
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("feature indices must be distinct")
        if not 0 < len(idx) < self.universe_size:
            raise ValueError(
                f"need 0 < k < {self.universe_size} features, got k = {len(idx)}"
            )
        if idx[0] < 0 or idx[-1] >= self.universe_size:
            raise ValueError("feature index outside the universe")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)


def feature_scores(w: ParamVector) -> np.ndarray:
    """L2 norm of each input feature's outgoing first-layer weights.

    For logistic regression this is ``|w_i|``.
    """
    return np.sqrt(np.sum(w.weight(0) ** 2, axis=1))


def top_k_features(w: ParamVector, k: int) -> FeatureSet:
    """The ``k`` highest-scoring input features; ties go to the lower index."""
    scores = feature_scores(w)
    m = scores.size
    if not 0 < k < m:
        raise ValueError(f"k must lie in [1, {m - 1}], got {k}")
    order = np.argsort(-scores, kind="stable")
    return FeatureSet(tuple(int(i) for i in order[:k]), m)


def kuncheva_index(a: FeatureSet, b: FeatureSet) -> float:
    """``(r d - k^2) / (k (d - k))`` with ``r = |a & b|``."""
    if a.universe_size != b.universe_size:
        raise ValueError("feature sets come from different universes")
    if a.k != b.k:
        raise ValueError(f"feature sets differ in size ({a.k} vs {b.k})")
    d, k = a.universe_size, a.k
    r = len(set(a.indices) & set(b.indices))
    return (r * d - k * k) / (k * (d - k))
