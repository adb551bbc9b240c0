"""Seeded random streams.

All randomness goes through :class:`RngStream`, a thin wrapper around numpy's
counter-based Philox-4x64 bit generator. Streams for different purposes are
derived from a master seed and a string label, so adding a new consumer never
shifts the draws of an existing one.
"""

from __future__ import annotations

import hashlib

import numpy as np

ALGORITHM = "philox4x64-10"


def _label_words(label: str) -> list[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """Deterministic random stream identified by ``(seed, label)``.

    Two streams with equal seed and label produce bit-identical draws. Distinct
    labels give distinct Philox keys, so their counter spaces never overlap.
    Instances are single-owner; derive a new stream per worker instead of
    sharing one.
    """

    algorithm_id = ALGORITHM

    def __init__(self, seed: int, label: str = "") -> None:
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.label = label
        entropy = [self.seed & 0xFFFFFFFF, self.seed >> 32, *_label_words(label)]
        seq = np.random.SeedSequence(entropy)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def derive(self, label: str) -> RngStream:
        """Return an independent stream for a sub-purpose."""
        full = f"{self.label}/{label}" if self.label else label
        return RngStream(self.seed, full)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def uniform(
        self, low: float, high: float, size: int | tuple[int, ...]
    ) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        return self._gen.standard_normal(size)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        """Sample ``size`` indices from ``range(n)``."""
        return np.asarray(self._gen.choice(n, size=size, replace=replace), dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        return np.asarray(self._gen.permutation(n), dtype=np.int64)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, label={self.label!r}, algorithm={ALGORITHM})"
