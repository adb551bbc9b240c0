"""Feed-forward network with leaky-ReLU hidden layers."""

from __future__ import annotations

from hyperpoison.models.network import FeedForwardNetwork
from hyperpoison.models.registry import register_model
from hyperpoison.models.spec import ModelSpec


class MultiLayerPerceptron(FeedForwardNetwork):
    @property
    def name(self) -> str:
        return "mlp"

    @property
    def description(self) -> str:
        return "Multi-layer perceptron with leaky-ReLU hidden layers"

    def validate_spec(self, spec: ModelSpec) -> None:
        if len(spec.layer_sizes) < 3:
            raise ValueError("an MLP needs at least one hidden layer")


register_model(MultiLayerPerceptron())
