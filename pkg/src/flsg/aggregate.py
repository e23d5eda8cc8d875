"""Median-norm clipping scales and the noised, clipped model average.

The clipping bound S_t is the upper median of the clients' differential-vector
norms: sort ascending and take index floor(n/2), so the bound is always an
element of the norm multiset (an even client count selects the upper middle).
Each accepted differential is scaled by min(1, S_t / norm) before averaging,
and seeded Gaussian noise with standard deviation noise_range * S_t (or
noise_range alone in absolute mode) is added per coordinate before the result
is narrowed back to float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoAcceptedModels, NonFiniteResult
from .models import ClusterLabels, DifferentialVector, L2Norms, ModelVector
from .numeric import widen
from .rng import NoiseSource


@dataclass(frozen=True)
class ScaleResult:
    """Median norm S_t plus the per-client clipping factors in [0, 1]."""

    median_norm: float
    scales: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.scales, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "scales", arr)


def compute_scales(norms: L2Norms) -> ScaleResult:
    """S_t = sorted(norms)[floor(n/2)]; scale_i = min(1, S_t / norm_i).

    A zero-norm client gets scale 1: its update is the zero vector, so the
    factor is irrelevant, and this avoids 0/0.
    """
    n = len(norms)
    if n < 1:
        raise DimensionMismatch("need at least one norm")
    ordered = np.sort(norms.norms, kind="stable")
    median = float(ordered[n // 2])
    scales = np.ones(n, dtype=np.float64)
    positive = norms.norms > 0.0
    scales[positive] = np.minimum(1.0, median / norms.norms[positive])
    return ScaleResult(median_norm=median, scales=scales)


def aggregate(
    global_model: ModelVector,
    diffs: list[DifferentialVector],
    labels: ClusterLabels,
    scale_result: ScaleResult,
    noise_range: float,
    noise: NoiseSource | None = None,
    *,
    absolute_sigma: bool = False,
) -> ModelVector:
    """Average global + scale_i * d_i over the accepted clients, then noise.

    Per coordinate c: (1/L) * sum_i (global[c] + scale_i * d_i[c]) + sigma * z_c,
    accumulated in float64 in ascending client order, with z drawn in
    coordinate order from ``noise``.  sigma = noise_range * S_t unless
    ``absolute_sigma``.  The result is narrowed to float32 once, at the end.
    """
    if noise_range < 0.0:
        raise ValueError("noise_range must be >= 0")
    accepted = labels.accepted_indices()
    if not accepted:
        raise NoAcceptedModels("no models were accepted for aggregation")
    if len(labels) != len(diffs):
        raise DimensionMismatch(f"{len(labels)} labels for {len(diffs)} differentials")

    p = global_model.param_count
    g64 = widen(global_model.params)
    scales = scale_result.scales
    acc = np.zeros(p, dtype=np.float64)
    for i in accepted:
        d = diffs[i].values
        if d.size != p:
            raise DimensionMismatch(f"differential {i} has length {d.size}, expected {p}")
        acc += g64 + scales[i] * widen(d)
    result = acc / len(accepted)

    sigma = noise_range if absolute_sigma else noise_range * scale_result.median_norm
    if sigma > 0.0:
        if noise is None:
            raise ValueError("a NoiseSource is required when the noise scale is positive")
        result = result + sigma * noise.standard_normal(p)

    if not np.all(np.isfinite(result)):
        raise NonFiniteResult("aggregated model contains NaN or Inf")
    with np.errstate(over="ignore"):  # overflow is detected and raised below
        out = result.astype(np.float32)
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult("aggregated model overflows float32")
    return ModelVector(out)
