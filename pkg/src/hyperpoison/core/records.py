"""Serialized result records for hyperpoison."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class RunHeader(BaseModel):
    """First line of every result file."""

    kind: Literal["header"] = "header"
    command: str
    version: str
    config: dict[str, Any]


class ResultRecord(BaseModel):
    """Evaluation of one (repetition, reg-mode, fraction) cell."""

    kind: Literal["result"] = "result"
    repetition: int
    seed: int
    mode: str
    fraction: float
    n_poison: int
    test_error: float
    lambdas: list[float] = Field(default_factory=list)
    weight_norms: list[float] = Field(default_factory=list)
    weight_norm_total: float = 0.0
    consistency: dict[str, float] = Field(default_factory=dict)
    val_loss_final: Optional[float] = None


class HyperlearnRecord(BaseModel):
    kind: Literal["hyperlearn"] = "hyperlearn"
    repetition: int
    seed: int
    iteration: int
    lambdas: list[float]
    val_loss: float


class SelectionRecord(BaseModel):
    """Lambda chosen by grid search or cross-validation."""

    kind: Literal["selection"] = "selection"
    repetition: int
    seed: int
    method: Literal["grid", "cv"]
    criterion: str
    best_lambda: float
    grid: list[float]
    scores: list[float]


class SynthCellRecord(BaseModel):
    """Validation errors with the poisoning point placed at one grid location."""

    kind: Literal["synth_cell"] = "synth_cell"
    seed: int
    x: list[float]
    val_error_noreg: float
    val_error_reg: float
    lambda_star: float


class SynthRunRecord(BaseModel):
    """Single-point attack summary for one seed."""

    kind: Literal["synth_run"] = "synth_run"
    seed: int
    clean_error_noreg: float
    clean_error_reg: float
    attacked_error_noreg: float
    attacked_error_reg: float
    poison_noreg: list[float]
    poison_reg: list[float]
    lambda_star_attack: float
    lambda_star_cluster: float
    feasible: bool


class CheckRecord(BaseModel):
    kind: Literal["check"] = "check"
    name: str
    max_rel_error: float
    tolerance: float
    passed: bool


class EvalRecord(BaseModel):
    kind: Literal["eval"] = "eval"
    seed: int
    norm: str
    lambdas: list[float]
    test_error: float
    weight_norms: list[float]
    weight_norm_total: float
    top_features: dict[str, list[int]] = Field(default_factory=dict)


class TimingRecord(BaseModel):
    repetition: int
    mode: str
    fraction: float
    seconds: float


class ValSizeRecord(BaseModel):
    """Mean test errors without and with learned lambda for one validation size.

    ``relative_decrease`` is ``(noreg - rmd) / noreg``, ``None`` when the
    unregularized error is zero.
    """

    kind: Literal["val_size"] = "val_size"
    n_val: int
    fraction: float
    test_error_noreg: float
    test_error_rmd: float
    relative_decrease: Optional[float]
