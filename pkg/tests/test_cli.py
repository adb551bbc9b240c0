"""Tests for CLI commands."""

from __future__ import annotations

from pathlib import Path

from typer.testing import CliRunner

from hyperpoison.cli.main import app
from hyperpoison.experiments.results import read_records

from .conftest import TINY_ATTACK

runner = CliRunner()


def _overrides(values: list[str]) -> list[str]:
    args: list[str] = []
    for value in values:
        args += ["--set", value]
    return args


def test_check_gradients_passes() -> None:
    result = runner.invoke(app, ["check-gradients", "--n-lr", "2", "--n-mlp", "1"])
    assert result.exit_code == 0


def test_check_gradients_detects_corruption() -> None:
    result = runner.invoke(
        app, ["check-gradients", "--n-lr", "0", "--n-mlp", "0", "--corrupt", "0.5"]
    )
    assert result.exit_code == 3


def test_unknown_preset() -> None:
    result = runner.invoke(app, ["eval", "--preset", "imagenet-lr"])
    assert result.exit_code == 1


def test_unknown_override_key() -> None:
    result = runner.invoke(app, ["eval", "--set", "attack.bogus=1"])
    assert result.exit_code == 1
    assert "attack.bogus" in result.output


def test_attack_writes_result_files(tmp_path: Path) -> None:
    out = tmp_path / "run.jsonl"
    result = runner.invoke(
        app,
        ["attack", "--preset", "synthetic-lr", "--out", str(out), "--jobs", "1"]
        + _overrides(TINY_ATTACK),
    )
    assert result.exit_code == 0, result.output
    assert out.exists()
    assert (tmp_path / "run.csv").exists()
    assert (tmp_path / "run.timings.csv").exists()
    lines = read_records(out)
    assert lines[0]["kind"] == "header"
    assert lines[0]["command"] == "attack"


def test_attack_same_seed_same_bytes(tmp_path: Path) -> None:
    args = ["attack", "--preset", "synthetic-lr", "--seed", "3"] + _overrides(TINY_ATTACK)
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert runner.invoke(app, args + ["--out", str(first)]).exit_code == 0
    assert runner.invoke(app, args + ["--out", str(second)]).exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_eval_with_lambda(tmp_path: Path) -> None:
    out = tmp_path / "eval.jsonl"
    result = runner.invoke(
        app,
        ["eval", "--lambda=-2.0", "--out", str(out)] + _overrides(TINY_ATTACK),
    )
    assert result.exit_code == 0, result.output
    lines = read_records(out)
    assert lines[1]["lambdas"] == [-2.0]


def test_hyperlearn_with_cv(tmp_path: Path) -> None:
    out = tmp_path / "hl.jsonl"
    result = runner.invoke(
        app,
        ["hyperlearn", "--cv", "--preset", "synthetic-lr", "--out", str(out)]
        + _overrides(TINY_ATTACK),
    )
    assert result.exit_code == 0, result.output
    assert len(read_records(out)) == 1 + 1 + 3


def test_synth_demo_without_map(tmp_path: Path) -> None:
    out = tmp_path / "synth.jsonl"
    result = runner.invoke(
        app,
        ["synth-demo", "--no-map", "--out", str(out)]
        + _overrides(TINY_ATTACK + ["synth.lambda_grid=[0.0]"]),
    )
    assert result.exit_code == 0, result.output
    assert "Saved 0 grid cells" in result.output


def test_synth_demo_writes_grid(tmp_path: Path) -> None:
    out = tmp_path / "map.jsonl"
    result = runner.invoke(
        app,
        ["synth-demo", "--out", str(out)]
        + _overrides(
            TINY_ATTACK
            + ["synth.grid_points=2", "synth.lambda_grid=[0.0]", "task.n_train=32"]
        ),
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "map.grid.csv").exists()


def test_check_gradients_reads_cg_section() -> None:
    result = runner.invoke(
        app,
        ["check-gradients", "--n-lr", "1", "--n-mlp", "0"]
        + _overrides(["cg.tol=1e-30", "cg.max_iters=1", "cg.strict=true"]),
    )
    assert result.exit_code == 2


def test_check_gradients_writes_report(tmp_path: Path) -> None:
    out = tmp_path / "checks.jsonl"
    result = runner.invoke(
        app, ["check-gradients", "--n-lr", "1", "--n-mlp", "0", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    lines = read_records(out)
    assert lines[0]["command"] == "check-gradients"
    assert [line["kind"] for line in lines[1:]] == ["check"] * 7


def test_val_sizes_sweep(tmp_path: Path) -> None:
    out = tmp_path / "sizes.jsonl"
    result = runner.invoke(
        app,
        ["val-sizes", "--n-val", "8", "--n-val", "16", "--preset", "synthetic-lr"]
        + ["--out", str(out)]
        + _overrides(TINY_ATTACK),
    )
    assert result.exit_code == 0, result.output
    lines = read_records(out)
    assert [line["n_val"] for line in lines[1:]] == [8, 8, 16, 16]
    assert (tmp_path / "sizes.val_sizes.csv").exists()
