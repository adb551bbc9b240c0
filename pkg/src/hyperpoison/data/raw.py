"""Undecoded image pools as read from disk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperpoison.core.exceptions import DatasetError


@dataclass(frozen=True)
class RawImages:
    """Flat ``uint8`` images (N x D), their labels and the per-image shape."""

    images: np.ndarray
    labels: np.ndarray
    image_shape: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.images.shape[0] != self.labels.shape[0]:
            raise DatasetError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def concat(self, other: RawImages) -> RawImages:
        if other.image_shape != self.image_shape:
            raise DatasetError(
                f"cannot pool images of shape {self.image_shape} and {other.image_shape}"
            )
        return RawImages(
            np.concatenate([self.images, other.images]),
            np.concatenate([self.labels, other.labels]),
            self.image_shape,
        )
