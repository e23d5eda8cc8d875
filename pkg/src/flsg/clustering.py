"""Majority-cluster filtering over the cosine-distance matrix.

This is a deliberately narrowed HDBSCAN: the cluster-size threshold is always
a strict majority of the clients (floor(n/2) + 1), so the condensed hierarchy
can never branch into two viable clusters.  What remains of the general
algorithm is a single chain:

1. core distances with one required neighbour, so mutual reachability equals
   the raw cosine distance;
2. an exact Prim minimum spanning tree over the complete graph;
3. single-linkage merges of the MST edges in ascending weight order;
4. a top-down walk of the dendrogram in which any split side smaller than the
   threshold "falls out" at lambda = 1/distance, while the majority side
   carries the chain onward until no side is big enough;
5. cluster selection, which for a single chain reduces to taking it; members
   are the points whose fall-out lambda reaches the chain's final lambda.

Step 5 reproduces the reference excess-of-mass labelling for a lone cluster:
a point belongs to the cluster iff its departure lambda is >= the maximum
departure lambda recorded for the cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import FlsgError
from .models import ClusterLabels, CosineDistanceMatrix

INFINITE_LAMBDA = math.inf


@dataclass(frozen=True)
class MstEdge:
    """Undirected spanning-tree edge with a < b."""

    a: int
    b: int
    weight: float


@dataclass(frozen=True)
class CondensedNode:
    """One point's membership interval in the condensed cluster chain."""

    parent: int
    child: int
    lambda_birth: float
    lambda_death: float
    size: int


@dataclass(frozen=True)
class CondensedChain:
    """The single condensed cluster and its per-point departure records."""

    cluster_id: int
    lambda_birth: float
    stability: float
    nodes: tuple


def minimum_spanning_tree(matrix: CosineDistanceMatrix) -> list[MstEdge]:
    """Prim's algorithm over the complete graph.

    Equal-weight candidates are broken toward the lexicographically smallest
    (min(u, v), max(u, v)) pair so the tree is input-order independent.
    """
    n = matrix.n
    d = matrix.entries
    if n <= 1:
        return []

    def pair(u: int, v: int) -> tuple:
        return (u, v) if u < v else (v, u)

    in_tree = [False] * n
    in_tree[0] = True
    best_w = [float(d[0, v]) for v in range(n)]
    best_src = [0] * n
    edges: list[MstEdge] = []
    for _ in range(n - 1):
        chosen = -1
        for v in range(n):
            if in_tree[v]:
                continue
            if chosen < 0:
                chosen = v
                continue
            key_v = (best_w[v], *pair(best_src[v], v))
            key_c = (best_w[chosen], *pair(best_src[chosen], chosen))
            if key_v < key_c:
                chosen = v
        a, b = pair(best_src[chosen], chosen)
        edges.append(MstEdge(a, b, best_w[chosen]))
        in_tree[chosen] = True
        for v in range(n):
            if in_tree[v]:
                continue
            w = float(d[chosen, v])
            if w < best_w[v] or (w == best_w[v] and pair(chosen, v) < pair(best_src[v], v)):
                best_w[v] = w
                best_src[v] = chosen
    return edges


def single_linkage_merges(edges: list[MstEdge], n: int) -> list[tuple]:
    """Union-find pass turning MST edges into dendrogram merges.

    Edges are processed in ascending (weight, a, b) order; merge t joins two
    cluster ids into new id n + t.  Returns (left_id, right_id, weight, size)
    per merge; zero-weight edges therefore merge first, which realises the
    lambda = +inf convention for coincident clients.
    """
    parent = list(range(n + len(edges)))
    cluster_of = list(range(n))  # union-find root -> current cluster id
    size = [1] * (n + len(edges))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merges: list[tuple] = []
    for t, e in enumerate(sorted(edges, key=lambda e: (e.weight, e.a, e.b))):
        ra, rb = find(e.a), find(e.b)
        ca, cb = cluster_of[ra], cluster_of[rb]
        new_id = n + t
        size[new_id] = size[ca] + size[cb]
        merges.append((ca, cb, e.weight, size[new_id]))
        parent[ra] = rb
        cluster_of[rb] = new_id
    return merges


def _leaves_under(node: int, children: dict, n: int) -> list[int]:
    out: list[int] = []
    stack = [node]
    while stack:
        x = stack.pop()
        if x < n:
            out.append(x)
        else:
            left, right, _ = children[x]
            stack.append(left)
            stack.append(right)
    return out


def condense_chain(merges: list[tuple], n: int, min_cluster_size: int) -> CondensedChain:
    """Walk the dendrogram top-down, shedding sub-threshold split sides.

    Because min_cluster_size exceeds n/2, no split can produce two viable
    sides; the walk is a straight chain that ends when the surviving
    component itself breaks into sub-threshold pieces, at which point all of
    its remaining points depart together.
    """
    cluster_id = n  # condensed root; points occupy ids 0..n-1
    if n == 1:
        nodes = (CondensedNode(cluster_id, 0, 0.0, INFINITE_LAMBDA, 1),)
        return CondensedChain(cluster_id, 0.0, INFINITE_LAMBDA, nodes)

    children = {n + t: (m[0], m[1], m[2]) for t, m in enumerate(merges)}
    sizes = {n + t: m[3] for t, m in enumerate(merges)}
    for point in range(n):
        sizes[point] = 1

    departures: list[tuple] = []
    current = n + len(merges) - 1  # dendrogram root
    while True:
        left, right, weight = children[current]
        lam = INFINITE_LAMBDA if weight <= 0.0 else 1.0 / weight
        left_big = sizes[left] >= min_cluster_size
        right_big = sizes[right] >= min_cluster_size
        if left_big and right_big:
            # Two majority-sized children would need > n points in total.
            raise FlsgError("cluster chain branched; min_cluster_size must exceed n/2")
        if not left_big and not right_big:
            for point in _leaves_under(current, children, n):
                departures.append((point, lam))
            break
        survivor, shed = (left, right) if left_big else (right, left)
        for point in _leaves_under(shed, children, n):
            departures.append((point, lam))
        current = survivor

    # Reference convention: the root cluster is born at lambda 0, and its
    # stability is the excess of mass sum((lambda_death - lambda_birth) * 1).
    lambda_birth = 0.0
    stability = sum(lam - lambda_birth for _, lam in departures)
    nodes = tuple(
        CondensedNode(cluster_id, point, lambda_birth, lam, 1) for point, lam in departures
    )
    return CondensedChain(cluster_id, lambda_birth, stability, nodes)


def cluster_and_label(matrix: CosineDistanceMatrix, min_cluster_size: int) -> ClusterLabels:
    """Label the majority cluster 1 and everything else 0.

    With the majority-size threshold a cluster always survives, so the
    all-noise outcome (accepted_count == 0) cannot occur here; the type still
    models it because the aggregation stage has a fallback for it.
    """
    n = matrix.n
    if n < 1:
        raise FlsgError("need at least one client to cluster")
    if 2 * min_cluster_size <= n:
        raise FlsgError(
            f"min_cluster_size {min_cluster_size} is not a majority of {n} clients"
        )
    edges = minimum_spanning_tree(matrix)
    merges = single_linkage_merges(edges, n)
    chain = condense_chain(merges, n, min_cluster_size)
    threshold = max(node.lambda_death for node in chain.nodes)
    labels = [0] * n
    for node in chain.nodes:
        if node.lambda_death >= threshold:
            labels[node.child] = 1
    return ClusterLabels(tuple(labels))
