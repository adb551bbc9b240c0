"""Slow end-to-end checks: the two-Gaussian task and reverse-mode cost."""

from __future__ import annotations

import statistics
import time

import numpy as np
import pytest

from hyperpoison.core.config import resolve_config
from hyperpoison.core.records import SynthRunRecord
from hyperpoison.core.rng import RngStream
from hyperpoison.data.dataset import Dataset
from hyperpoison.experiments.synth_demo import run_synth_demo
from hyperpoison.hypergrad import rmd_hypergrad
from hyperpoison.models import ModelSpec, ParamVector, RegSpec

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def synth_runs() -> list[SynthRunRecord]:
    """Ten seeds of the single-point attack, no location map."""
    config = resolve_config(preset="synthetic-lr", overrides=["repetitions=10"])
    return run_synth_demo(config, with_map=False).runs


class TestSinglePointAttack:
    def test_attack_raises_unregularized_error(self, synth_runs: list[SynthRunRecord]) -> None:
        raised = [r.attacked_error_noreg > r.clean_error_noreg for r in synth_runs]
        assert sum(raised) >= 9

    def test_regularization_damps_the_attack(self, synth_runs: list[SynthRunRecord]) -> None:
        damped = [
            r.attacked_error_reg - r.clean_error_reg
            < r.attacked_error_noreg - r.clean_error_noreg
            for r in synth_runs
        ]
        assert sum(damped) >= 9

    def test_iterates_stay_in_the_box(self, synth_runs: list[SynthRunRecord]) -> None:
        assert all(r.feasible for r in synth_runs)

    def test_selected_lambda_larger_at_attack_location(
        self, synth_runs: list[SynthRunRecord]
    ) -> None:
        larger = [r.lambda_star_attack > r.lambda_star_cluster for r in synth_runs]
        pairs = [(r.lambda_star_attack, r.lambda_star_cluster) for r in synth_runs]
        assert sum(larger) >= 8, pairs


def _median_seconds(T: int, trials: int = 5) -> float:
    gen = RngStream(8, "cost").generator
    spec = ModelSpec(kind="lr", layer_sizes=(10, 1))
    train = Dataset(gen.uniform(-1.0, 1.0, (200, 10)), np.arange(200) % 2)
    val = Dataset(gen.uniform(-1.0, 1.0, (50, 10)), np.arange(50) % 2)
    reg = RegSpec(norm="l2", lambdas=(-2.0,))
    w0 = ParamVector.zeros(spec)
    rows = np.arange(5)
    times = []
    for _ in range(trials):
        start = time.perf_counter()
        rmd_hypergrad(spec, train, rows, reg, val, w0, 0.2, T)
        times.append(time.perf_counter() - start)
    return statistics.median(times)


class TestReverseModeCost:
    def test_time_grows_linearly_in_steps(self) -> None:
        _median_seconds(50, trials=1)
        ratio = _median_seconds(400) / _median_seconds(200)
        assert 1.6 <= ratio <= 2.6, ratio
