"""Clean-data evaluation of a regularized model."""

from __future__ import annotations

import logging
from typing import Optional

from hyperpoison.core.config import ExperimentConfig, resolve_fixed_lambda
from hyperpoison.core.records import EvalRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.base import load_task
from hyperpoison.experiments.common import (
    build_model_spec,
    build_reg,
    init_scheme,
    repetition_seed,
)
from hyperpoison.metrics.classification import test_error
from hyperpoison.metrics.features import top_k_features
from hyperpoison.metrics.norms import weight_norms
from hyperpoison.models.training import fit

logger = logging.getLogger(__name__)


def run_eval(config: ExperimentConfig, lambda_value: Optional[float] = None) -> list[EvalRecord]:
    """Train on each repetition's clean split and report test metrics.

    ``lambda_value`` defaults to the configured fixed lambda; it is ignored
    when ``reg.norm`` is ``none``.
    """
    records = []
    for rep in range(config.repetitions):
        seed = repetition_seed(config, rep)
        task = load_task(config.task, seed)
        spec = build_model_spec(config, task.train.m)
        value = None
        if config.reg.norm != "none":
            value = resolve_fixed_lambda(config) if lambda_value is None else lambda_value
        reg = build_reg(config, spec, value)
        w = fit(
            spec,
            task.train,
            reg,
            config.eval.eta_tr,
            config.eval.epochs,
            init_scheme(config, spec),
            RngStream(seed, "eval"),
        )
        norms = weight_norms(spec, w)
        top = {
            f"k={k}": list(top_k_features(w, k).indices)
            for k in config.eval.top_k
            if 0 < k < spec.n_features
        }
        record = EvalRecord(
            seed=seed,
            norm=config.reg.norm,
            lambdas=list(reg.lambdas),
            test_error=test_error(spec, w, task.test),
            weight_norms=list(norms.per_layer),
            weight_norm_total=norms.total,
            top_features=top,
        )
        logger.info("seed %d: test error %.4f", seed, record.test_error)
        records.append(record)
    return records
