"""Dense array helpers with a fixed reduction order."""

from __future__ import annotations

from typing import Literal

import numpy as np

from hyperpoison.core.exceptions import ShapeError

NormKind = Literal["l1", "l2", "l2_squared"]
Reduction = Literal["sequential", "blas"]


def as_matrix(a: np.ndarray | list[list[float]], name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite float64 2-D array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ShapeError(f"{name} contains non-finite entries")
    return out


def matmul(
    a: np.ndarray, b: np.ndarray, reduction: Reduction = "sequential"
) -> np.ndarray:
    """Matrix product ``a @ b``.

    With ``reduction="sequential"`` every output entry is accumulated over the
    inner index left to right, exactly as a naive triple loop would, so the
    result is bit-reproducible on any platform. ``"blas"`` hands the product
    to numpy's BLAS, which is much faster and reproducible for a fixed BLAS
    build and thread count.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    if reduction == "blas":
        return a @ b
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    for k in range(a.shape[1]):
        out += a[:, k : k + 1] * b[k : k + 1, :]
    return out


def norm(v: np.ndarray, kind: NormKind = "l2") -> float:
    v = np.asarray(v, dtype=np.float64).ravel()
    if kind == "l1":
        return float(np.sum(np.abs(v)))
    sq = float(np.dot(v, v))
    if kind == "l2_squared":
        return sq
    if kind == "l2":
        return float(np.sqrt(sq))
    raise ValueError(f"Unknown norm kind: {kind}")


def clip_elementwise(
    x: np.ndarray, lo: np.ndarray | float, hi: np.ndarray | float
) -> np.ndarray:
    """Project ``x`` onto the box ``[lo, hi]`` (broadcasting bounds)."""
    x = np.asarray(x, dtype=np.float64)
    lo_arr = np.broadcast_to(np.asarray(lo, dtype=np.float64), x.shape)
    hi_arr = np.broadcast_to(np.asarray(hi, dtype=np.float64), x.shape)
    if np.any(lo_arr > hi_arr):
        bad = int(np.argmax((lo_arr > hi_arr).ravel()))
        raise ValueError(f"clip bounds inverted at flat index {bad}: lo > hi")
    return np.minimum(np.maximum(x, lo_arr), hi_arr)
