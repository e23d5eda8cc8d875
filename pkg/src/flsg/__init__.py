"""Backdoor-aware federated-learning aggregation pipeline.

Filtering (cosine distances + majority clustering), median-norm clipping, and
seeded Gaussian noising over flat float32 model vectors, plus an attested
scheduler service and a synthetic attack/defense harness around them.
"""

from .aggregate import ScaleResult, aggregate, compute_scales
from .clustering import cluster_and_label
from .cosine import CascadeReport, cosine_distances_cascade, cosine_distances_naive
from .errors import FlsgError
from .models import (
    ClusterLabels,
    CosineDistanceMatrix,
    DifferentialVector,
    L2Norms,
    ModelVector,
    RoundConfig,
    deserialize_model,
    min_cluster_size_for,
    serialize_model,
)
from .pipeline import RoundReport, run_defense_round
from .preprocess import preprocess
from .rng import Mt19937, NoiseSource, inverse_normal_cdf, standard_normal_stream

__all__ = [
    "CascadeReport",
    "ClusterLabels",
    "CosineDistanceMatrix",
    "DifferentialVector",
    "FlsgError",
    "L2Norms",
    "ModelVector",
    "Mt19937",
    "NoiseSource",
    "RoundConfig",
    "RoundReport",
    "ScaleResult",
    "aggregate",
    "cluster_and_label",
    "compute_scales",
    "cosine_distances_cascade",
    "cosine_distances_naive",
    "deserialize_model",
    "inverse_normal_cdf",
    "min_cluster_size_for",
    "preprocess",
    "run_defense_round",
    "serialize_model",
    "standard_normal_stream",
]

__version__ = "0.1.0"
