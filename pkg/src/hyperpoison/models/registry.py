"""Model registration."""

from __future__ import annotations

from hyperpoison.models.base import BaseClassifier

_MODELS: dict[str, BaseClassifier] = {}


def register_model(model: BaseClassifier) -> None:
    _MODELS[model.name] = model


def get_model(kind: str) -> BaseClassifier:
    if kind not in _MODELS:
        raise ValueError(f"Unknown model kind: {kind}. Available: {sorted(_MODELS)}")
    return _MODELS[kind]


def get_all_models() -> dict[str, BaseClassifier]:
    return dict(_MODELS)
