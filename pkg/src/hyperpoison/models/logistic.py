"""Logistic regression."""

from __future__ import annotations

from hyperpoison.models.network import FeedForwardNetwork
from hyperpoison.models.registry import register_model
from hyperpoison.models.spec import ModelSpec


class LogisticRegression(FeedForwardNetwork):
    @property
    def name(self) -> str:
        return "lr"

    @property
    def description(self) -> str:
        return "Logistic regression (single linear layer, sigmoid output)"

    def validate_spec(self, spec: ModelSpec) -> None:
        if len(spec.layer_sizes) != 2:
            raise ValueError(
                f"logistic regression takes layer_sizes [m, 1], got {list(spec.layer_sizes)}"
            )


register_model(LogisticRegression())
