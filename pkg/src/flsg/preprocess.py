"""Differential vectors and L2 norms, computed in one pass over the local models.

Subtraction happens in float32 (the exchanged precision) because the
differential vectors are streamed onward to the cosine engine and stored for
the aggregation stage; the norm accumulation widens each difference to float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .models import DifferentialVector, L2Norms, ModelVector
from .numeric import sumsq64, widen


def preprocess(
    global_model: ModelVector,
    local_models: list[ModelVector],
) -> tuple[list[DifferentialVector], L2Norms]:
    """Compute d_i = local_i - global (float32) and its float64 L2 norm per client.

    Client index is the position in ``local_models``; the differential vectors
    come back in that order so the cosine engine can consume them as a stream.
    """
    if len(local_models) < 1:
        raise DimensionMismatch("need at least one local model")
    p = global_model.param_count
    g = global_model.params
    diffs: list[DifferentialVector] = []
    norms = np.empty(len(local_models), dtype=np.float64)
    for i, local in enumerate(local_models):
        if local.param_count != p:
            raise DimensionMismatch(
                f"local model {i} has {local.param_count} parameters, expected {p}"
            )
        d = np.subtract(local.params, g, dtype=np.float32)
        diffs.append(DifferentialVector(client_index=i, values=d))
        norms[i] = np.sqrt(sumsq64(widen(d)))
    return diffs, L2Norms(norms)
