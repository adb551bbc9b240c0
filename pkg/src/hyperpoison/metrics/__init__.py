"""Evaluation measures."""

from hyperpoison.metrics.classification import predict, test_error
from hyperpoison.metrics.features import (
    FeatureSet,
    feature_scores,
    kuncheva_index,
    top_k_features,
)
from hyperpoison.metrics.norms import WeightNorms, weight_norms

__all__ = [
    "FeatureSet",
    "WeightNorms",
    "feature_scores",
    "kuncheva_index",
    "predict",
    "test_error",
    "top_k_features",
    "weight_norms",
]
