"""hyperpoison - optimal poisoning attacks and regularization learning via hypergradients."""

from __future__ import annotations

__version__ = "0.1.0"

from hyperpoison.attack import run_attack, run_hyperlearn  # noqa: E402
from hyperpoison.core.config import ExperimentConfig, resolve_config  # noqa: E402
from hyperpoison.hypergrad import rmd_hypergrad  # noqa: E402

__all__ = [
    "ExperimentConfig",
    "__version__",
    "resolve_config",
    "rmd_hypergrad",
    "run_attack",
    "run_hyperlearn",
]
