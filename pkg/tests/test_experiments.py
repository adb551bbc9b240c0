"""Tests for the experiment drivers and result files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from hyperpoison.core.config import CGConfig, ExperimentConfig
from hyperpoison.core.exceptions import ConfigError, ConvergenceError, HyperPoisonError
from hyperpoison.core.records import ResultRecord
from hyperpoison.experiments.attack_sweep import run_attack_sweep
from hyperpoison.experiments.evaluate import run_eval
from hyperpoison.experiments.gradcheck import run_gradient_checks, scale_corruption
from hyperpoison.experiments.hyperlearn import run_hyperlearn_experiment
from hyperpoison.experiments.parallel import run_parallel
from hyperpoison.experiments.results import (
    grid_table,
    projection,
    read_records,
    sibling,
    write_projection,
    write_records,
    write_timings,
    write_val_sizes,
)
from hyperpoison.experiments.synth_demo import location_grid, run_synth_demo
from hyperpoison.experiments.val_sizes import relative_decrease, run_val_size_sweep, sized_config


def _update(config: ExperimentConfig, **sections: dict[str, Any]) -> ExperimentConfig:
    data = config.model_dump()
    for name, values in sections.items():
        data[name].update(values)
    return ExperimentConfig.from_dict(data)


class TestParallel:
    def test_results_keep_task_order(self) -> None:
        assert run_parallel(lambda x: x * x, [3, 1, 2], jobs=3) == [9, 1, 4]

    def test_inline_when_single_job(self) -> None:
        assert run_parallel(str, [1, 2], jobs=1) == ["1", "2"]

    def test_failures_are_wrapped(self) -> None:
        def boom(x: int) -> int:
            if x == 2:
                raise RuntimeError("bad task")
            return x

        with pytest.raises(HyperPoisonError, match="bad task"):
            run_parallel(boom, [1, 2, 3], jobs=2)


class TestAttackSweep:
    def test_cells_and_order(self, tiny_config: ExperimentConfig) -> None:
        result = run_attack_sweep(tiny_config)
        assert len(result.records) == 1 * 3 * 2
        assert [(r.mode, r.fraction) for r in result.records] == [
            ("none", 0.0),
            ("none", 0.125),
            ("fixed", 0.0),
            ("fixed", 0.125),
            ("rmd", 0.0),
            ("rmd", 0.125),
        ]
        assert [r.n_poison for r in result.records[:2]] == [0, 2]
        assert result.records[0].lambdas == []
        assert len(result.records[2].lambdas) == 1
        assert all(0.0 <= r.test_error <= 1.0 for r in result.records)
        assert len(result.timings) == len(result.records)
        assert not result.selections

    def test_results_are_reproducible(self, tiny_config: ExperimentConfig, tmp_path: Path) -> None:
        runs = [run_attack_sweep(tiny_config).records for _ in range(2)]
        first = write_records(tmp_path / "a.jsonl", "attack", tiny_config, runs[0])
        second = write_records(tmp_path / "b.jsonl", "attack", tiny_config, runs[1])
        assert first.read_bytes() == second.read_bytes()

    def test_workers_do_not_change_results(self, tiny_config: ExperimentConfig) -> None:
        serial = run_attack_sweep(tiny_config)
        parallel = run_attack_sweep(tiny_config.model_copy(update={"jobs": 3}))
        assert [r.model_dump() for r in serial.records] == [
            r.model_dump() for r in parallel.records
        ]

    def test_cross_validated_mode(self, tiny_config: ExperimentConfig) -> None:
        config = _update(tiny_config, reg={"modes": ["clean"]})
        result = run_attack_sweep(config)
        assert len(result.selections) == 1
        selection = result.selections[0]
        assert selection.method == "cv"
        assert selection.best_lambda in (-2.0, 0.0)
        assert all(r.lambdas == [selection.best_lambda] for r in result.records)

    def test_mnist_files(self, tiny_config: ExperimentConfig, mnist_dir: Path) -> None:
        config = _update(
            tiny_config,
            task={
                "dataset": "mnist",
                "data_dir": str(mnist_dir),
                "class_pair": (0, 8),
                "n_test": 20,
            },
            reg={"modes": ["fixed"], "fixed_lambda": 0.0},
            eval={"top_k": [4]},
        )
        result = run_attack_sweep(config)
        assert [r.n_poison for r in result.records] == [0, 2]
        assert result.records[0].consistency == {"k=4": 1.0}


class TestResultFiles:
    def test_header_then_records(self, tiny_config: ExperimentConfig, tmp_path: Path) -> None:
        result = run_attack_sweep(tiny_config)
        path = write_records(tmp_path / "out" / "run.jsonl", "attack", tiny_config, result.records)
        lines = read_records(path)
        assert lines[0]["kind"] == "header"
        assert lines[0]["command"] == "attack"
        assert lines[0]["config"]["attack"]["T_mul"] == 2
        assert [line["kind"] for line in lines[1:]] == ["result"] * 6

        csv = pd.read_csv(write_projection(path, result.records))
        assert list(csv.columns) == ["mode", "fraction", "mean_test_error", "mean_lambda"]
        assert len(csv) == 6
        timings = pd.read_csv(write_timings(path, result.timings))
        assert (timings["seconds"] >= 0).all()
        assert sibling(path, ".timings.csv").name == "run.timings.csv"

    def test_projection_averages_repetitions(self, tiny_config: ExperimentConfig) -> None:
        config = tiny_config.model_copy(update={"repetitions": 2})
        result = run_attack_sweep(config)
        frame = projection(result.records)
        assert len(frame) == 6
        none_zero = [r.test_error for r in result.records if r.mode == "none" and r.fraction == 0]
        row = frame[(frame["mode"] == "none") & (frame["fraction"] == 0.0)]
        assert row["mean_test_error"].iloc[0] == pytest.approx(sum(none_zero) / 2)

    def test_records_are_json(self, tiny_config: ExperimentConfig, tmp_path: Path) -> None:
        path = write_records(tmp_path / "r.jsonl", "eval", tiny_config, run_eval(tiny_config))
        for line in path.read_text().splitlines():
            json.loads(line)


class TestHyperlearnExperiment:
    def test_trajectory(self, tiny_config: ExperimentConfig) -> None:
        out = run_hyperlearn_experiment(tiny_config)
        assert len(out.trajectory) == tiny_config.attack.T_mul + 1
        assert [r.iteration for r in out.trajectory] == [0, 1, 2]
        assert out.trajectory[0].lambdas == [tiny_config.attack.lambda_init]
        assert not out.selections

    def test_with_cross_validation(self, tiny_config: ExperimentConfig) -> None:
        out = run_hyperlearn_experiment(tiny_config, cv=True)
        assert len(out.selections) == 1
        assert out.selections[0].grid == [-2.0, 0.0]


class TestEval:
    def test_fixed_lambda_by_default(self, tiny_config: ExperimentConfig) -> None:
        config = _update(tiny_config, eval={"top_k": [1]})
        records = run_eval(config)
        assert len(records) == 1
        assert records[0].lambdas == [pytest.approx(config.reg.fixed_lambda)]
        assert len(records[0].top_features["k=1"]) == 1

    def test_explicit_lambda(self, tiny_config: ExperimentConfig) -> None:
        records = run_eval(tiny_config, lambda_value=-3.0)
        assert records[0].lambdas == [-3.0]
        assert records[0].top_features == {}


class TestSynthDemo:
    def test_small_run(self, tiny_config: ExperimentConfig) -> None:
        config = _update(
            tiny_config,
            synth={"grid_points": 2, "lambda_grid": [-1.0, 1.0]},
            task={"n_train": 32, "n_val": 64},
        )
        out = run_synth_demo(config)
        assert len(out.runs) == 1
        run = out.runs[0]
        assert run.feasible
        assert all(abs(v) <= 9.5 for v in run.poison_noreg + run.poison_reg)
        assert run.lambda_star_attack in (-1.0, 1.0)
        assert len(out.cells) == 4
        assert [c.x for c in out.cells] == location_grid(config).tolist()
        table = grid_table(out.cells)
        assert list(table.columns)[:3] == ["seed", "x0", "x1"]
        assert len(table) == 4

    def test_without_map(self, tiny_config: ExperimentConfig) -> None:
        out = run_synth_demo(_update(tiny_config, synth={"lambda_grid": [0.0]}), with_map=False)
        assert out.cells == []
        assert out.runs[0].lambda_star_cluster == 0.0


class TestGradientChecks:
    def test_small_suite_passes(self) -> None:
        records = run_gradient_checks(n_lr=2, n_mlp=1, seed=0)
        names = [r.name for r in records]
        assert names[:4] == [
            "toy/rmd/poison",
            "toy/rmd/lambda",
            "toy/implicit/poison",
            "toy/implicit/lambda",
        ]
        assert "mlp/rmd-vs-fmd" in names
        assert all(r.passed for r in records), [r for r in records if not r.passed]

    def test_corruption_fails(self) -> None:
        records = run_gradient_checks(n_lr=0, n_mlp=0, corrupt=scale_corruption(1.5))
        assert len(records) == 4
        assert not any(r.passed for r in records)

    def test_cg_settings_reach_the_implicit_check(self) -> None:
        strict = CGConfig(tol=1e-30, max_iters=1, strict=True)
        with pytest.raises(ConvergenceError):
            run_gradient_checks(n_lr=1, n_mlp=0, cg=strict)


def _record(mode: str, fraction: float, error: float) -> ResultRecord:
    return ResultRecord(
        repetition=0, seed=0, mode=mode, fraction=fraction, n_poison=0, test_error=error
    )


class TestValSizeSweep:
    def test_relative_decrease(self) -> None:
        records = [
            _record("none", 0.0, 0.5),
            _record("none", 0.1, 0.0),
            _record("rmd", 0.0, 0.25),
            _record("rmd", 0.1, 0.1),
        ]
        rows = relative_decrease(40, records)
        assert [(r.n_val, r.fraction) for r in rows] == [(40, 0.0), (40, 0.1)]
        assert rows[0].relative_decrease == pytest.approx(0.5)
        assert rows[1].relative_decrease is None
        assert rows[1].test_error_rmd == pytest.approx(0.1)

    def test_sized_config(self, tiny_config: ExperimentConfig) -> None:
        sized = sized_config(tiny_config, 8)
        assert sized.task.n_val == 8
        assert sized.task.n_train == tiny_config.task.n_train
        assert sized.reg.modes == ["none", "rmd"]

    def test_odd_size_rejected(self, tiny_config: ExperimentConfig) -> None:
        with pytest.raises(ConfigError):
            sized_config(tiny_config, 7)

    def test_needs_sizes(self, tiny_config: ExperimentConfig) -> None:
        with pytest.raises(ConfigError):
            run_val_size_sweep(tiny_config, [])

    def test_small_sweep(self, tiny_config: ExperimentConfig, tmp_path: Path) -> None:
        rows = run_val_size_sweep(tiny_config, [8, 16])
        assert [(r.n_val, r.fraction) for r in rows] == [
            (8, 0.0),
            (8, 0.125),
            (16, 0.0),
            (16, 0.125),
        ]
        for r in rows:
            if r.test_error_noreg > 0:
                expected = (r.test_error_noreg - r.test_error_rmd) / r.test_error_noreg
                assert r.relative_decrease == pytest.approx(expected)
            else:
                assert r.relative_decrease is None
        table = pd.read_csv(write_val_sizes(tmp_path / "sizes.jsonl", rows))
        assert list(table.columns) == [
            "n_val",
            "fraction",
            "test_error_noreg",
            "test_error_rmd",
            "relative_decrease",
        ]
        assert len(table) == 4
