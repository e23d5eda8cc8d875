#!/usr/bin/env python3
"""Generate clustering oracle fixtures with the reference HDBSCAN.

Runs scikit-learn's HDBSCAN (min_cluster_size = floor(n/2)+1, min_samples = 1,
precomputed metric, single-cluster selection allowed) over random symmetric
distance matrices and freezes (matrix, labels) pairs under tests/fixtures/.
Regenerating requires scikit-learn; the test suite itself does not.

Fixture format, one instance per file:
    line 1:            n
    lines 2..n+1:      matrix rows, space-separated %.17g floats
    last line:         expected labels, n space-separated 0/1 ints
"""

import sys
import warnings
from pathlib import Path

import numpy as np
from sklearn.cluster import HDBSCAN

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "hdbscan"
COUNT = 120
SEED = 20250810


def random_matrix(rng: np.random.Generator, n: int, kind: int) -> np.ndarray:
    if kind == 0:
        upper = rng.uniform(0.0, 2.0, (n, n))
    elif kind == 1:
        # tight majority cluster plus scattered outliers
        members = int(rng.integers(n // 2 + 1, n + 1))
        upper = rng.uniform(0.8, 2.0, (n, n))
        upper[:members, :members] = rng.uniform(0.0, 0.2, (members, members))
    else:
        # near-degenerate spread around one value
        upper = 0.5 + rng.uniform(-1e-6, 1e-6, (n, n))
    d = np.triu(upper, 1)
    return d + d.T


def reference_labels(matrix: np.ndarray, min_cluster_size: int) -> list[int]:
    clusterer = HDBSCAN(
        min_cluster_size=min_cluster_size,
        min_samples=1,
        metric="precomputed",
        allow_single_cluster=True,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        raw = clusterer.fit_predict(matrix)
    return [1 if v == 0 else 0 for v in raw]


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    for index in range(COUNT):
        n = int(rng.integers(5, 31))
        matrix = random_matrix(rng, n, kind=index % 3)
        labels = reference_labels(matrix, n // 2 + 1)
        lines = [str(n)]
        lines += [" ".join(f"{v:.17g}" for v in row) for row in matrix]
        lines.append(" ".join(str(v) for v in labels))
        (OUT_DIR / f"{index:03d}.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {COUNT} fixtures to {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
