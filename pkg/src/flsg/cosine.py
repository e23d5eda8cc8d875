"""Pairwise cosine distances via a cascade of vector-holding stages.

The cascade mirrors a hardware pipeline with ``stages`` slots, each of which
latches the first vector it sees and computes a dot product against every
later vector flowing past.  One pass covers all pairs whose lower index falls
in that pass's window of ``stages`` consecutive vectors, so ceil(n / stages)
passes cover every unordered pair exactly once.  Pass 0 is fed directly by
the preprocessor stream; every vector fed in a later pass is a reload and is
charged to ``total_memory_reloads``.

``cosine_distances_naive`` is the quadratic oracle: a plain double loop using
the same float64 dot-product helper, so the two routes must agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, StageCountZero
from .models import CosineDistanceMatrix, DifferentialVector, L2Norms
from .numeric import dot64, widen


@dataclass(frozen=True)
class CascadeReport:
    """Pass schedule and memory-traffic accounting for one cascade run."""

    pass_count: int
    vector_feeds_per_pass: tuple
    total_memory_reloads: int
    dot_products_computed: int


def _pair_distance(dot: float, norm_i: float, norm_j: float) -> float:
    # Zero-norm policy: two zero updates point the same way (distance 0);
    # a zero update against a non-zero one is treated as orthogonal (distance 1).
    if norm_i == 0.0 and norm_j == 0.0:
        return 0.0
    if norm_i == 0.0 or norm_j == 0.0:
        return 1.0
    return 1.0 - dot / (norm_i * norm_j)


def _check_lengths(vectors: list[np.ndarray]) -> None:
    p = vectors[0].size
    for i, v in enumerate(vectors):
        if v.size != p:
            raise DimensionMismatch(f"differential vector {i} has length {v.size}, expected {p}")


def cosine_distances_naive(
    diffs: list[DifferentialVector],
    norms: L2Norms,
) -> CosineDistanceMatrix:
    """Direct upper-triangle double loop; the oracle for the cascade."""
    n = len(norms)
    if len(diffs) != n:
        raise DimensionMismatch(f"{len(diffs)} vectors but {n} norms")
    vecs = [widen(d.values) for d in diffs]
    if n > 0:
        _check_lengths(vecs)
    nrm = norms.norms
    entries = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            dist = _pair_distance(dot64(vecs[i], vecs[j]), nrm[i], nrm[j])
            entries[i, j] = dist
            entries[j, i] = dist
    return CosineDistanceMatrix(entries)


def cosine_distances_cascade(
    diffs: Iterable[DifferentialVector],
    norms: L2Norms,
    stages: int,
    pair_sink: list | None = None,
) -> tuple[CosineDistanceMatrix, CascadeReport]:
    """Compute the distance matrix with a ``stages``-slot cascade.

    ``diffs`` may be a one-shot stream: pass 0 consumes it in client order and
    the vectors are retained for the reload passes.  ``pair_sink``, if given,
    receives every (held, fed) index pair in computation order.
    """
    if stages < 1:
        raise StageCountZero("cascade needs at least one stage")
    n = len(norms)
    nrm = norms.norms
    entries = np.zeros((n, n), dtype=np.float64)

    stream = iter(diffs)
    vault: list[np.ndarray] = []  # widened vectors, stands in for DDR-RAM

    def fetch(index: int) -> np.ndarray:
        while len(vault) <= index:
            try:
                d = next(stream)
            except StopIteration:
                raise DimensionMismatch(
                    f"stream ended after {len(vault)} vectors, expected {n}"
                ) from None
            w = widen(d.values)
            if vault and w.size != vault[0].size:
                raise DimensionMismatch(
                    f"differential vector {len(vault)} has length {w.size}, expected {vault[0].size}"
                )
            vault.append(w)
        return vault[index]

    feeds: list[int] = []
    dots = 0
    pass_index = 0
    while pass_index * stages < n:
        base = pass_index * stages
        held: list[int | None] = [None] * stages
        for v in range(base, n):
            vec = fetch(v)
            for s in range(stages):
                h = held[s]
                if h is None:
                    held[s] = v  # first arrival latches; nothing forwarded
                    break
                if h < v:
                    dist = _pair_distance(dot64(vault[h], vec), nrm[h], nrm[v])
                    entries[h, v] = dist
                    entries[v, h] = dist
                    dots += 1
                    if pair_sink is not None:
                        pair_sink.append((h, v))
        feeds.append(n - base)
        pass_index += 1

    report = CascadeReport(
        pass_count=pass_index,
        vector_feeds_per_pass=tuple(feeds),
        total_memory_reloads=sum(feeds) - n if feeds else 0,
        dot_products_computed=dots,
    )
    return CosineDistanceMatrix(entries), report
