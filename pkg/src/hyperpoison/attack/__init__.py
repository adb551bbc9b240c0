"""Poisoning attacks and regularization-hyperparameter learning."""

from hyperpoison.attack.engine import (
    AttackResult,
    FractionResult,
    HyperlearnResult,
    StepEvent,
    StepInfo,
    StepOutcome,
    attack_step,
    poison_counts,
    run_attack,
    run_hyperlearn,
)
from hyperpoison.attack.poison import PoisonSet, init_poison, project
from hyperpoison.attack.selection import (
    SelectionResult,
    cross_validate_lambda,
    grid_search_lambda,
)

__all__ = [
    "AttackResult",
    "FractionResult",
    "HyperlearnResult",
    "PoisonSet",
    "SelectionResult",
    "StepEvent",
    "StepInfo",
    "StepOutcome",
    "attack_step",
    "cross_validate_lambda",
    "grid_search_lambda",
    "init_poison",
    "poison_counts",
    "project",
    "run_attack",
    "run_hyperlearn",
]
