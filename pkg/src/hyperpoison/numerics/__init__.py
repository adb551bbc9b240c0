"""Deterministic dense-array substrate."""

from .cg import CGResult as CGResult
from .cg import conjugate_gradient as conjugate_gradient
from .linalg import as_matrix as as_matrix
from .linalg import clip_elementwise as clip_elementwise
from .linalg import matmul as matmul
from .linalg import norm as norm
