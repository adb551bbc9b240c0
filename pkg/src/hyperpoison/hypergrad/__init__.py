"""Hypergradient engines."""

from .base import Hypergrad as Hypergrad
from .base import outer_value as outer_value
from .base import relative_error as relative_error
from .finite_diff import fd_hypergrad as fd_hypergrad
from .fmd import fmd_hypergrad as fmd_hypergrad
from .implicit import implicit_hypergrad as implicit_hypergrad
from .rmd import reverse_accumulate as reverse_accumulate
from .rmd import rmd_hypergrad as rmd_hypergrad
