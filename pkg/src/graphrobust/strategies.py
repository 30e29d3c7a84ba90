"""Node-removal strategies: each one produces a total order on the nodes.

A ranking is an int64 permutation of 0..n-1; position 0 is removed
first.  Strategies are pure functions of their inputs, and the randomized
ones are deterministic for a fixed seed, so a ranking can be computed
once per graph and reused across removal levels.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from urllib.parse import urlsplit

import numpy as np

from .graph import DirectedGraph


@dataclass(frozen=True)
class Clustering:
    """A node partition given by per-node labels.

    external_degrees[x] counts x's neighbours (in the symmetric graph the
    clustering was computed on) whose label differs from x's.
    """

    labels: np.ndarray
    external_degrees: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    def cluster_count(self) -> int:
        return len(np.unique(self.labels))


def random_order(n: int, seed: int = 0) -> np.ndarray:
    """Uniform random permutation of 0..n-1 (the no-strategy baseline)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.random.default_rng(seed).permutation(n).astype(np.int64)


def degree_order(g: DirectedGraph) -> np.ndarray:
    """Nodes by decreasing outdegree, ties broken by ascending id."""
    outdeg = g.out_degrees()
    return np.lexsort((np.arange(g.n), -outdeg)).astype(np.int64)


def _url_depth(url: str) -> tuple[float, str]:
    """(path depth, host) of a URL; (inf, '') when it cannot be parsed."""
    try:
        parts = urlsplit(url)
    except ValueError:
        return float("inf"), ""
    if not parts.netloc:
        return float("inf"), ""
    segments = [s for s in parts.path.split("/") if s]
    return float(len(segments)), parts.netloc


def near_root_order(urls: list[str]) -> np.ndarray:
    """Nodes by ascending URL path depth: site roots first, then their
    children, and so on.  Ties break by host, then node id.  Unparsable
    URLs get infinite depth (ranked last) and trigger one warning.
    """
    keyed = [_url_depth(u) for u in urls]
    bad = sum(1 for depth, _ in keyed if depth == float("inf"))
    if bad:
        warnings.warn(f"{bad} of {len(urls)} URLs could not be parsed; "
                      "those nodes are ranked last", stacklevel=2)
    order = sorted(range(len(urls)), key=lambda i: (keyed[i][0], keyed[i][1], i))
    return np.asarray(order, dtype=np.int64)


def pagerank_order(g: DirectedGraph, damping: float = 0.85,
                   tol: float = 1e-8,
                   max_iterations: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """PageRank scores and the descending-score ranking.

    Power iteration on the uniform-teleport chain over the directed
    graph as given (not symmetrized); mass of dangling nodes is spread
    uniformly.  Stops when the l1 change drops below tol.

    Returns:
        (scores, order): scores sum to 1; order breaks ties by node id.

    Raises:
        RuntimeError: no convergence within max_iterations.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    n = g.n
    outdeg = g.out_degrees().astype(np.float64)
    dangling = outdeg == 0
    push = g.to_csr().T.tocsr().astype(np.float64)

    x = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        w = np.divide(x, outdeg, out=np.zeros(n), where=~dangling)
        lost = x[dangling].sum()
        new = damping * (push @ w) + (damping * lost + (1.0 - damping)) / n
        if np.abs(new - x).sum() < tol:
            x = new
            break
        x = new
    else:
        raise RuntimeError(f"PageRank did not converge in {max_iterations} iterations")
    order = np.lexsort((np.arange(n), -x)).astype(np.int64)
    return x, order


def label_propagation(g: DirectedGraph, seed: int = 0,
                      max_rounds: int = 100) -> Clustering:
    """Asynchronous label propagation over a symmetric graph.

    Labels start as node ids.  Each round visits the nodes in a fresh
    random permutation; a node adopts the most frequent label among its
    neighbours, keeping its own label when it ties for the maximum and
    otherwise picking uniformly among the tied maxima.  Stops after a
    round with no change, or after max_rounds.  Isolated nodes keep
    their own label.

    The caller symmetrizes directed graphs first; this function checks
    symmetry and refuses asymmetric input.
    """
    from .graph import transpose
    if g != transpose(g):
        raise ValueError("label propagation requires a symmetric graph")
    rng = np.random.default_rng(seed)
    n = g.n
    labels = np.arange(n, dtype=np.int64)
    indptr, targets = g.indptr, g.targets

    for _ in range(max_rounds):
        changed = 0
        for x in rng.permutation(n):
            lo, hi = indptr[x], indptr[x + 1]
            if lo == hi:
                continue
            neigh = labels[targets[lo:hi]]
            labs, counts = np.unique(neigh, return_counts=True)
            best = counts.max()
            candidates = labs[counts == best]
            own = labels[x]
            if own in candidates:
                continue
            if len(candidates) == 1:
                new = candidates[0]
            else:
                new = candidates[rng.integers(len(candidates))]
            labels[x] = new
            changed += 1
        if changed == 0:
            break

    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    differs = labels[src] != labels[targets]
    external = np.bincount(src[differs], minlength=n).astype(np.int64)
    return Clustering(labels, external)


def lp_order(g: DirectedGraph, clustering: Clustering) -> np.ndarray:
    """Ranking derived from a clustering: round-robin over clusters.

    Clusters are ordered by decreasing size (smallest member id breaks
    ties); within a cluster, nodes are ordered by decreasing external
    degree (id breaks ties).  Pass k emits the k-th node of every
    cluster in cluster order, skipping exhausted clusters, so the first
    pass removes each cluster's best-connected gateway to the rest of
    the graph.
    """
    if clustering.n != g.n:
        raise ValueError("clustering does not cover the graph's node set")
    labels = clustering.labels
    ext = clustering.external_degrees

    members: dict[int, list[int]] = {}
    for node in range(g.n):
        members.setdefault(int(labels[node]), []).append(node)
    for nodes in members.values():
        nodes.sort(key=lambda v: (-ext[v], v))
    clusters = sorted(members.values(), key=lambda nodes: (-len(nodes), min(nodes)))

    ranking = np.empty(g.n, dtype=np.int64)
    pos = 0
    k = 0
    while pos < g.n:
        for nodes in clusters:
            if k < len(nodes):
                ranking[pos] = nodes[k]
                pos += 1
        k += 1
    return ranking
