"""Builders shared by the experiment drivers."""

from __future__ import annotations

from typing import Optional

import numpy as np

from hyperpoison.core.config import ExperimentConfig, RegMode, resolve_fixed_lambda
from hyperpoison.models.spec import ModelSpec, RegSpec
from hyperpoison.models.training import InitScheme, default_init_scheme


def repetition_seed(config: ExperimentConfig, repetition: int) -> int:
    return config.master_seed + repetition


def build_model_spec(config: ExperimentConfig, n_features: int) -> ModelSpec:
    m = config.model
    return ModelSpec(
        kind=m.kind,
        layer_sizes=(n_features, *m.hidden, 1),
        leaky_slope=m.leaky_slope,
        bias=m.bias,
        reduction=m.reduction,
    )


def init_scheme(config: ExperimentConfig, spec: ModelSpec) -> InitScheme:
    if config.model.init == "auto":
        return default_init_scheme(spec)
    return config.model.init


def n_groups(config: ExperimentConfig, spec: ModelSpec) -> int:
    return spec.n_layers if config.reg.grouping == "per-layer" else 1


def build_reg(
    config: ExperimentConfig, spec: ModelSpec, lambda_value: Optional[float]
) -> RegSpec:
    """Regularizer of the configured norm with every lambda set to ``lambda_value``.

    ``None`` gives the unregularized spec.
    """
    if lambda_value is None or config.reg.norm == "none":
        return RegSpec()
    return RegSpec(
        norm=config.reg.norm,
        grouping=config.reg.grouping,
        lambdas=tuple(np.full(n_groups(config, spec), float(lambda_value))),
        include_bias=config.reg.include_bias,
    )


def mode_reg(
    config: ExperimentConfig,
    spec: ModelSpec,
    mode: RegMode,
    clean_lambda: Optional[float] = None,
) -> tuple[RegSpec, bool]:
    """Regularizer template and whether lambda is learned, per mode."""
    if mode == "none":
        return RegSpec(), False
    if mode == "fixed":
        return build_reg(config, spec, resolve_fixed_lambda(config)), False
    if mode == "rmd":
        return build_reg(config, spec, config.attack.lambda_init), True
    if clean_lambda is None:
        raise ValueError("'clean' mode needs the cross-validated lambda")
    return build_reg(config, spec, clean_lambda), False
