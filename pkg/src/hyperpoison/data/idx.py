"""IDX (MNIST / Fashion-MNIST) reader and writer.

Layout, all integers big-endian::

    images: 0x00000803, count, rows, cols, then count*rows*cols bytes
    labels: 0x00000801, count, then count bytes

Files ending in ``.gz`` are transparently (de)compressed.
"""

from __future__ import annotations

import gzip
import logging
import struct
from pathlib import Path

import numpy as np

from hyperpoison.core.exceptions import DatasetError
from hyperpoison.data.raw import RawImages

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path: Path) -> bytes:
    if not path.exists():
        raise DatasetError(f"File not found: {path}")
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as fh:
                return fh.read()
        return path.read_bytes()
    except OSError as e:
        raise DatasetError(f"Failed to read {path}: {e}") from e


def _write_bytes(path: Path, payload: bytes) -> None:
    if path.suffix == ".gz":
        with gzip.open(path, "wb") as fh:
            fh.write(payload)
    else:
        path.write_bytes(payload)


def _header(buf: bytes, path: Path, magic: int, n_dims: int) -> tuple[int, ...]:
    size = 4 * (1 + n_dims)
    if len(buf) < size:
        raise DatasetError(f"{path}: truncated header at byte offset {len(buf)}")
    found, *dims = struct.unpack(f">{1 + n_dims}I", buf[:size])
    if found != magic:
        raise DatasetError(f"{path}: bad magic 0x{found:08x}, expected 0x{magic:08x}")
    return tuple(dims)


def _payload(buf: bytes, path: Path, offset: int, expected: int) -> np.ndarray:
    available = len(buf) - offset
    if available < expected:
        raise DatasetError(
            f"{path}: truncated payload at byte offset {len(buf)} "
            f"(expected {offset + expected} bytes)"
        )
    return np.frombuffer(buf, dtype=np.uint8, count=expected, offset=offset).copy()


def load_idx(images_path: str | Path, labels_path: str | Path) -> RawImages:
    """Parse an IDX image file and its label file.

    Raises:
        DatasetError: on a missing file, bad magic, truncated payload or a
            count mismatch between the two files.
    """
    img_path, lbl_path = Path(images_path), Path(labels_path)
    img_buf = _read_bytes(img_path)
    count, rows, cols = _header(img_buf, img_path, IMAGE_MAGIC, 3)
    images = _payload(img_buf, img_path, 16, count * rows * cols)

    lbl_buf = _read_bytes(lbl_path)
    (n_labels,) = _header(lbl_buf, lbl_path, LABEL_MAGIC, 1)
    labels = _payload(lbl_buf, lbl_path, 8, n_labels)
    if n_labels != count:
        raise DatasetError(f"{count} images in {img_path} but {n_labels} labels in {lbl_path}")

    logger.info("Loaded %d IDX images of %dx%d from %s", count, rows, cols, img_path)
    return RawImages(images.reshape(count, rows * cols), labels, (rows, cols))


def write_idx(
    images_path: str | Path,
    labels_path: str | Path,
    images: np.ndarray,
    labels: np.ndarray,
) -> None:
    """Encode ``images`` (N x rows x cols, uint8) and ``labels`` as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8).ravel()
    if images.ndim != 3:
        raise DatasetError(f"IDX images must be N x rows x cols, got shape {images.shape}")
    if images.shape[0] != labels.shape[0]:
        raise DatasetError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    count, rows, cols = images.shape
    _write_bytes(
        Path(images_path),
        struct.pack(">4I", IMAGE_MAGIC, count, rows, cols) + images.tobytes(),
    )
    _write_bytes(Path(labels_path), struct.pack(">2I", LABEL_MAGIC, count) + labels.tobytes())
