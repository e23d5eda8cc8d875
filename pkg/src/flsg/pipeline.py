"""One defended aggregation round, wired in processing-element order.

preprocess -> cascade cosine distances -> { clustering || clipping scales }
-> noised aggregation.  Clustering and scale computation have no data
dependency on each other, so they run on separate threads and join before the
aggregation step.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .aggregate import ScaleResult, aggregate, compute_scales
from .clustering import cluster_and_label
from .cosine import CascadeReport, cosine_distances_cascade
from .errors import NoAcceptedModels
from .models import ClusterLabels, CosineDistanceMatrix, ModelVector, RoundConfig
from .preprocess import preprocess
from .rng import NoiseSource

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoundReport:
    """Everything observable about one round besides the new global model."""

    labels: ClusterLabels
    accepted_count: int
    all_noise_fallback: bool
    scale: ScaleResult
    cascade: CascadeReport
    matrix: CosineDistanceMatrix


def run_defense_round(
    global_model: ModelVector,
    local_models: list[ModelVector],
    config: RoundConfig,
    noise: NoiseSource | None = None,
) -> tuple[ModelVector, RoundReport]:
    """Run the full defense on plaintext models, client order as given."""
    if len(local_models) != config.n:
        raise ValueError(f"config expects {config.n} models, got {len(local_models)}")
    if noise is None and config.noise_range > 0.0:
        noise = NoiseSource(config.rng_seed)

    diffs, norms = preprocess(global_model, local_models)
    matrix, cascade_report = cosine_distances_cascade(diffs, norms, config.cascade_stages)

    with ThreadPoolExecutor(max_workers=2) as pool:
        labels_future = pool.submit(cluster_and_label, matrix, config.min_cluster_size)
        scales_future = pool.submit(compute_scales, norms)
        labels = labels_future.result()
        scale_result = scales_future.result()

    fallback = False
    if labels.all_noise:
        if not config.accept_all_on_no_cluster:
            raise NoAcceptedModels("clustering found no majority cluster")
        log.warning("no majority cluster found; accepting all %d models", config.n)
        labels = ClusterLabels(tuple([1] * config.n))
        fallback = True

    new_global = aggregate(
        global_model,
        diffs,
        labels,
        scale_result,
        config.noise_range,
        noise,
        absolute_sigma=config.absolute_sigma,
    )
    report = RoundReport(
        labels=labels,
        accepted_count=labels.accepted_count,
        all_noise_fallback=fallback,
        scale=scale_result,
        cascade=cascade_report,
        matrix=matrix,
    )
    return new_global, report
