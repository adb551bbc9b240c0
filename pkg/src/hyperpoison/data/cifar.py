"""CIFAR-10 binary-version reader and writer.

Each record is one label byte followed by 3072 pixel bytes (1024 red, then
1024 green, then 1024 blue, each 32x32 row-major).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from hyperpoison.core.exceptions import DatasetError
from hyperpoison.data.raw import RawImages

logger = logging.getLogger(__name__)

IMAGE_SHAPE = (3, 32, 32)
PIXELS = 3 * 32 * 32
RECORD_BYTES = PIXELS + 1


def load_cifar10_binary(paths: Sequence[str | Path]) -> RawImages:
    """Concatenate the records of ``paths`` in the given order.

    Raises:
        DatasetError: if a file is missing or its length is not a multiple
            of 3073 bytes.
    """
    images: list[np.ndarray] = []
    labels: list[np.ndarray] = []
    for p in paths:
        path = Path(p)
        if not path.exists():
            raise DatasetError(f"File not found: {path}")
        try:
            buf = np.fromfile(path, dtype=np.uint8)
        except OSError as e:
            raise DatasetError(f"Failed to read {path}: {e}") from e
        if buf.size % RECORD_BYTES:
            raise DatasetError(
                f"{path}: {buf.size} bytes is not a multiple of the {RECORD_BYTES}-byte record"
            )
        records = buf.reshape(-1, RECORD_BYTES)
        labels.append(records[:, 0].copy())
        images.append(records[:, 1:].copy())
        logger.info("Loaded %d CIFAR-10 records from %s", records.shape[0], path)
    if not images:
        return RawImages(np.zeros((0, PIXELS), np.uint8), np.zeros(0, np.uint8), IMAGE_SHAPE)
    return RawImages(np.concatenate(images), np.concatenate(labels), IMAGE_SHAPE)


def write_cifar10_binary(path: str | Path, images: np.ndarray, labels: np.ndarray) -> None:
    """Write ``images`` (N x 3072 or N x 3 x 32 x 32, uint8) as binary records."""
    flat = np.asarray(images, dtype=np.uint8).reshape(-1, PIXELS)
    lbl = np.asarray(labels, dtype=np.uint8).reshape(-1, 1)
    if flat.shape[0] != lbl.shape[0]:
        raise DatasetError(f"{flat.shape[0]} images but {lbl.shape[0]} labels")
    Path(path).write_bytes(np.hstack([lbl, flat]).tobytes())
