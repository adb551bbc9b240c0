"""Configuration management for hyperpoison.

Configurations are pydantic models. They can be built from a nested dict,
from one of the named presets, or from a flat ``key = value`` text file with
dotted section keys::

    # mnist, smaller attack
    attack.T_mul = 60
    attack.fraction_schedule = [0, 0.1, 0.2]
    reg.norm = l1

Values are parsed as JSON when possible and kept as bare strings otherwise.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path
from typing import Any, Iterable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from hyperpoison.core.exceptions import ConfigError

DatasetName = Literal["synthetic", "mnist", "fmnist", "cifar10"]
RegMode = Literal["none", "fixed", "rmd", "clean"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TaskConfig(_Section):
    dataset: DatasetName = "synthetic"
    data_dir: Optional[str] = None
    n_train: int = Field(32, ge=2)
    n_val: int = Field(64, ge=2)
    n_test: int = Field(1000, ge=2)
    class_pair: tuple[int, int] = (0, 1)
    normalization: Optional[Literal["unit_interval", "symmetric_unit"]] = None

    @model_validator(mode="after")
    def _check(self) -> TaskConfig:
        if self.class_pair[0] == self.class_pair[1]:
            raise ValueError("class_pair labels must differ")
        for name in ("n_train", "n_val", "n_test"):
            if getattr(self, name) % 2:
                raise ValueError(f"{name} must be even for balanced splits")
        return self


class ModelConfig(_Section):
    kind: Literal["lr", "mlp"] = "lr"
    hidden: list[int] = Field(default_factory=list)
    leaky_slope: float = 0.01
    bias: bool = True
    reduction: Literal["sequential", "blas"] = "sequential"
    init: Literal["auto", "zeros", "xavier"] = "auto"

    @model_validator(mode="after")
    def _check(self) -> ModelConfig:
        if self.kind == "lr" and self.hidden:
            raise ValueError("lr models take no hidden layers")
        if self.kind == "mlp" and not self.hidden:
            raise ValueError("mlp models need at least one hidden layer")
        return self


class RegConfig(_Section):
    norm: Literal["none", "l2", "l1"] = "l2"
    grouping: Literal["single", "per-layer"] = "single"
    include_bias: bool = False
    fixed_lambda: Optional[float] = None
    modes: list[RegMode] = Field(default_factory=lambda: ["none", "fixed", "rmd"])
    cv_folds: int = Field(5, ge=2)
    cv_grid: list[float] = Field(default_factory=lambda: [float(v) for v in range(-8, 7)])
    criterion: Literal["loss", "error"] = "loss"

    @model_validator(mode="after")
    def _check(self) -> RegConfig:
        if not self.modes:
            raise ValueError("at least one regularization mode is required")
        if not self.cv_grid:
            raise ValueError("cv_grid must not be empty")
        return self


class AttackConfig(_Section):
    T_mul: int = Field(50, ge=0)
    alpha: float = 0.4
    T: int = Field(100, ge=1)
    eta: float = 0.2
    lambda_bounds: tuple[Optional[float], Optional[float]] = (None, None)
    lambda_init: float = 0.0
    poison_batch: int = Field(350, ge=1)
    fraction_schedule: list[float] = Field(default_factory=lambda: [0.0])
    normalize_xp_grad: bool = True
    lambda_sign_update: bool = True
    learn_lambda: bool = True
    include_reg_outer: bool = False
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> AttackConfig:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        fr = self.fraction_schedule
        if not fr or fr[0] != 0.0:
            raise ValueError("fraction_schedule must start at 0")
        if any(b < a for a, b in zip(fr, fr[1:])) or fr[-1] >= 1.0:
            raise ValueError("fraction_schedule must be non-decreasing and below 1")
        lo, hi = self.lambda_bounds
        if lo is not None and hi is not None and lo > hi:
            raise ValueError("lambda_bounds lower bound exceeds upper bound")
        return self

    @property
    def lambda_lo(self) -> float:
        return -math.inf if self.lambda_bounds[0] is None else self.lambda_bounds[0]

    @property
    def lambda_hi(self) -> float:
        return math.inf if self.lambda_bounds[1] is None else self.lambda_bounds[1]


class EvalConfig(_Section):
    eta_tr: float = 0.2
    epochs: int = Field(100, ge=0)
    top_k: list[int] = Field(default_factory=lambda: [20])


class CGConfig(_Section):
    tol: float = Field(1e-10, gt=0)
    max_iters: Optional[int] = Field(None, ge=1)
    damping: float = Field(0.0, ge=0)
    strict: bool = False


class SynthDemoConfig(_Section):
    grid_points: int = Field(21, ge=1)
    grid_lo: float = -9.5
    grid_hi: float = 9.5
    fixed_lambda: float = math.log(20.0)
    lambda_grid: list[float] = Field(
        default_factory=lambda: [float(v) for v in range(-8, 7)]
    )


class ExperimentConfig(_Section):
    task: TaskConfig = Field(default_factory=TaskConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    reg: RegConfig = Field(default_factory=RegConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    cg: CGConfig = Field(default_factory=CGConfig)
    synth: SynthDemoConfig = Field(default_factory=SynthDemoConfig)
    repetitions: int = Field(1, ge=1)
    master_seed: int = Field(0, ge=0)
    output_path: str = "results.jsonl"
    jobs: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> ExperimentConfig:
        if self.model.kind == "mlp" and "clean" in self.reg.modes:
            raise ValueError("cross-validated lambda ('clean' mode) is only supported for lr")
        if self.reg.norm == "none" and any(m != "none" for m in self.reg.modes):
            raise ValueError("reg.norm = none only allows the 'none' mode")
        return self

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise _config_error(e) from e


def _config_error(e: ValidationError) -> ConfigError:
    err = e.errors()[0]
    key = ".".join(str(part) for part in err["loc"])
    return ConfigError(err["msg"], key=key or None)


# Large "fixed" lambdas per (dataset, model kind, norm).
LARGE_LAMBDA: dict[tuple[str, str, str], float] = {
    ("mnist", "lr", "l2"): math.log(1e3),
    ("fmnist", "lr", "l2"): math.log(1e3),
    ("cifar10", "lr", "l2"): math.log(1e4),
    ("mnist", "mlp", "l2"): math.log(100.0),
    ("fmnist", "mlp", "l2"): math.log(500.0),
    ("cifar10", "mlp", "l2"): math.log(500.0),
    ("mnist", "lr", "l1"): math.log(50.0),
    ("fmnist", "lr", "l1"): math.log(25.0),
    ("cifar10", "lr", "l1"): math.log(100.0),
    ("mnist", "mlp", "l1"): math.log(50.0),
    ("fmnist", "mlp", "l1"): math.log(10.0),
    ("cifar10", "mlp", "l1"): math.log(25.0),
    ("synthetic", "lr", "l2"): math.log(20.0),
    ("synthetic", "lr", "l1"): math.log(20.0),
}


def resolve_fixed_lambda(config: ExperimentConfig) -> float:
    """``reg.fixed_lambda`` or the preset large value for the task."""
    if config.reg.fixed_lambda is not None:
        return config.reg.fixed_lambda
    key = (config.task.dataset, config.model.kind, config.reg.norm)
    if key not in LARGE_LAMBDA:
        raise ConfigError(f"no default large lambda for {key}", key="reg.fixed_lambda")
    return LARGE_LAMBDA[key]


FULL_SCHEDULE = [round(0.07 * i, 2) for i in range(6)]


def _full_scale(
    dataset: str,
    pair: tuple[int, int],
    sizes: tuple[int, int, int],
    normalization: str,
    attack: tuple[int, float, float, int],
    lambda_hi: float,
    hidden: Optional[list[int]] = None,
) -> dict[str, Any]:
    T_mul, alpha, eta, T = attack
    model: dict[str, Any] = {"kind": "lr"}
    reg: dict[str, Any] = {"norm": "l2", "modes": ["none", "fixed", "rmd", "clean"]}
    if hidden:
        model = {"kind": "mlp", "hidden": hidden}
        reg = {"norm": "l2", "grouping": "per-layer", "modes": ["none", "fixed", "rmd"]}
    return {
        "task": {
            "dataset": dataset,
            "n_train": sizes[0],
            "n_val": sizes[1],
            "n_test": sizes[2],
            "class_pair": list(pair),
            "normalization": normalization,
        },
        "model": model,
        "reg": reg,
        "attack": {
            "T_mul": T_mul,
            "alpha": alpha,
            "eta": eta,
            "T": T,
            "lambda_bounds": [None, lambda_hi],
            "poison_batch": 350,
            "fraction_schedule": FULL_SCHEDULE,
        },
        "eval": {"eta_tr": eta, "epochs": T},
        "repetitions": 10,
    }


_MNIST = ("mnist", (0, 8), (5000, 500, 3000), "unit_interval")
_FMNIST = ("fmnist", (1, 2), (5000, 500, 3000), "unit_interval")
_CIFAR = ("cifar10", (0, 6), (5000, 1000, 2500), "symmetric_unit")

PRESETS: dict[str, dict[str, Any]] = {
    "mnist-lr": _full_scale(*_MNIST, (140, 0.3, 0.1, 140), math.log(5e3)),
    "fmnist-lr": _full_scale(*_FMNIST, (150, 0.3, 0.04, 160), math.log(5e3)),
    "cifar-lr": _full_scale(*_CIFAR, (120, 0.3, 0.01, 500), math.log(1e5)),
    "mnist-dnn": _full_scale(
        *_MNIST, (180, 0.075, 0.04, 700), math.log(5e3), hidden=[32, 8]
    ),
    "fmnist-dnn": _full_scale(
        *_FMNIST, (150, 0.1, 0.03, 800), math.log(5e3), hidden=[32, 8]
    ),
    "cifar-dnn": _full_scale(
        *_CIFAR, (120, 0.1, 0.03, 800), math.log(1e5), hidden=[64, 32]
    ),
    "synthetic-lr": {
        "task": {"dataset": "synthetic", "n_train": 32, "n_val": 64, "n_test": 1000},
        "model": {"kind": "lr"},
        "reg": {"norm": "l2", "fixed_lambda": math.log(20.0), "criterion": "error"},
        "attack": {
            "T_mul": 50,
            "alpha": 0.4,
            "eta": 0.2,
            "T": 100,
            "lambda_bounds": [-8.0, 6.0],
            "poison_batch": 4,
            "fraction_schedule": [0.0, 0.125, 0.25],
        },
        "eval": {"eta_tr": 0.2, "epochs": 100},
        "repetitions": 10,
    },
    "mnist-lr-desk": {
        "task": {
            "dataset": "mnist",
            "n_train": 500,
            "n_val": 100,
            "n_test": 500,
            "class_pair": [0, 8],
            "normalization": "unit_interval",
        },
        "model": {"kind": "lr"},
        "reg": {"norm": "l2", "modes": ["none", "fixed", "rmd"]},
        "attack": {
            "T_mul": 60,
            "alpha": 0.3,
            "eta": 0.1,
            "T": 140,
            "lambda_bounds": [None, math.log(5e3)],
            "poison_batch": 50,
            "fraction_schedule": [0.0, 0.1, 0.2],
        },
        "eval": {"eta_tr": 0.1, "epochs": 140, "top_k": [20]},
        "repetitions": 5,
    },
}


def get_preset(name: str) -> dict[str, Any]:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset '{name}'. Available: {', '.join(sorted(PRESETS))}",
            key="preset",
        )
    return copy.deepcopy(PRESETS[name])


def parse_value(raw: str) -> Any:
    """JSON if it parses, else the stripped string."""
    text = raw.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    if not all(parts):
        raise ConfigError("malformed key", key=key)
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"'{part}' is not a section", key=key)
        node = child
    node[parts[-1]] = value


def parse_config_text(text: str, source: str = "<string>") -> dict[str, Any]:
    """Parse ``key = value`` lines into a nested dict."""
    data: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        set_dotted(data, key.strip(), parse_value(raw))
    return data


def merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Recursive dict merge; ``update`` wins."""
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config_file(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}", key="config")
    return parse_config_text(p.read_text(encoding="utf-8"), source=str(p))


def parse_overrides(items: Iterable[str]) -> dict[str, Any]:
    data: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not key=value", key="set")
        key, raw = item.split("=", 1)
        set_dotted(data, key.strip(), parse_value(raw))
    return data


def resolve_config(
    preset: Optional[str] = None,
    path: Optional[str | Path] = None,
    overrides: Iterable[str] = (),
    **flags: Any,
) -> ExperimentConfig:
    """Preset, then file, then ``--set`` overrides, then explicit flags.

    ``flags`` with value ``None`` are ignored.
    """
    data: dict[str, Any] = get_preset(preset) if preset else {}
    if path is not None:
        data = merge(data, load_config_file(path))
    data = merge(data, parse_overrides(overrides))
    data = merge(data, {k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig.from_dict(data)
