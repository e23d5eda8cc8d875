"""Deterministic float64 reductions used by every pipeline stage.

All dot products and squared-norm sums in the pipeline accumulate in float64,
strictly in ascending element order.  ``np.cumsum`` is used because it is a
sequential left fold (each prefix depends on the previous one), so its final
element is bit-identical to an explicit ``for`` loop while running at C speed.
``np.dot`` must NOT be substituted here: BLAS reorders the additions.
"""

from __future__ import annotations

import numpy as np


def widen(values: np.ndarray) -> np.ndarray:
    """Widen a float32 vector to a contiguous float64 copy."""
    return np.ascontiguousarray(values, dtype=np.float64)


def dot64(a: np.ndarray, b: np.ndarray) -> float:
    """Sequential ascending-index float64 dot product of two equal-length vectors."""
    prod = np.multiply(a, b, dtype=np.float64)
    if prod.size == 0:
        return 0.0
    return float(np.cumsum(prod)[-1])


def sumsq64(a: np.ndarray) -> float:
    """Sequential ascending-index float64 sum of squares."""
    return dot64(a, a)
