"""Directed graph storage and the ranked node-removal procedure.

Graphs are stored CSR-style: an ``indptr`` offset array and a flat,
per-row-sorted ``targets`` array, with nodes identified by the integers
``0..n-1``.  Graphs are immutable after construction; every operation
returns a new graph.  Loading deduplicates arcs and drops self-loops, so
``m`` always counts simple arcs.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np
from scipy.sparse import csr_matrix


class DirectedGraph:
    """Immutable directed graph over node ids 0..n-1.

    Attributes:
        n: node count.
        m: arc count (after deduplication, self-loops excluded).
        indptr: int64 array of length n+1; row x spans
            targets[indptr[x]:indptr[x+1]].
        targets: int64 array of length m, sorted within each row.
        original_ids: when the graph came from an edge-list file whose ids
            were compacted, the original id of each compacted node
            (ascending); None otherwise.
    """

    __slots__ = ("n", "m", "indptr", "targets", "original_ids")

    def __init__(self, indptr: np.ndarray, targets: np.ndarray,
                 original_ids: np.ndarray | None = None):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.targets = np.ascontiguousarray(targets, dtype=np.int64)
        self.n = len(self.indptr) - 1
        self.m = len(self.targets)
        self.original_ids = original_ids
        if self.indptr[0] != 0 or self.indptr[-1] != self.m:
            raise ValueError("inconsistent indptr/targets")
        if self.m and (self.targets.min() < 0 or self.targets.max() >= self.n):
            raise ValueError("arc target out of range")
        self.indptr.setflags(write=False)
        self.targets.setflags(write=False)

    @classmethod
    def from_arcs(cls, src, dst, n: int | None = None,
                  original_ids: np.ndarray | None = None) -> "DirectedGraph":
        """Build a graph from parallel source/target arrays.

        Duplicate arcs and self-loops are dropped.  ``n`` defaults to
        1 + the largest id mentioned.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if n is None:
            n = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
        if len(src) and (src.min() < 0 or dst.min() < 0):
            raise ValueError("negative node id")
        if len(src) and (src.max() >= n or dst.max() >= n):
            raise ValueError("node id >= n")
        keep = src != dst
        src, dst = src[keep], dst[keep]
        if len(src):
            key = src * np.int64(n) + dst
            key = np.unique(key)
            src, dst = key // n, key % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(indptr, dst, original_ids)

    def successors(self, x: int) -> np.ndarray:
        return self.targets[self.indptr[x]:self.indptr[x + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def arc_array(self) -> tuple[np.ndarray, np.ndarray]:
        """All arcs as (src, dst) parallel arrays."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees())
        return src, self.targets.copy()

    def to_csr(self) -> csr_matrix:
        return csr_matrix(
            (np.ones(self.m, dtype=np.int8), self.targets, self.indptr),
            shape=(self.n, self.n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.targets, other.targets))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class RemovalOutcome:
    """Result of deleting a ranking prefix from a graph.

    The surviving graph keeps the original id space: removed nodes stay
    as ids but have no incident arcs and are flagged in ``removed_mask``.
    Downstream measurements must skip them (they are gone, not isolated).
    """

    graph: DirectedGraph
    removed_ids: np.ndarray      # in removal order
    removed_mask: np.ndarray     # bool, length n
    removed_arcs: int
    achieved_fraction: float

    @property
    def removed_node_count(self) -> int:
        return len(self.removed_ids)

    @property
    def live_mask(self) -> np.ndarray:
        return ~self.removed_mask

    @property
    def live_count(self) -> int:
        return int(self.live_mask.sum())


def _iter_lines(source) -> tuple[Iterator[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        fh = open(source, "r", encoding="utf-8")
        return iter(fh), True
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return iter(source), False
    return iter(source), False


def load_edge_list(source: str | os.PathLike | IO[str] | Iterable[str]) -> DirectedGraph:
    """Load a directed graph from edge-list text.

    One arc per line as two non-negative base-10 integers "src dst";
    lines starting with '#' and blank lines are ignored.  Node ids need
    not be contiguous: they are compacted to 0..n-1 in ascending order of
    the original id, and the original ids are kept on the returned
    graph's ``original_ids`` for metadata alignment.  Duplicate arcs and
    self-loops are dropped.

    Raises:
        ValueError: on a malformed line (message names the line number)
            or if the input holds no arcs at all.
    """
    lines, close = _iter_lines(source)
    src_ids: list[int] = []
    dst_ids: list[int] = []
    try:
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(
                    f"line {lineno}: expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(
                    f"line {lineno}: expected two integers, got {line!r}") from None
            if a < 0 or b < 0:
                raise ValueError(f"line {lineno}: negative node id in {line!r}")
            src_ids.append(a)
            dst_ids.append(b)
    finally:
        if close:
            lines.close()  # type: ignore[attr-defined]
    if not src_ids:
        raise ValueError("empty edge list: no arcs found")
    src = np.asarray(src_ids, dtype=np.int64)
    dst = np.asarray(dst_ids, dtype=np.int64)
    uniq = np.unique(np.concatenate([src, dst]))
    src = np.searchsorted(uniq, src)
    dst = np.searchsorted(uniq, dst)
    return DirectedGraph.from_arcs(src, dst, n=len(uniq), original_ids=uniq)


def load_urls(source: str | os.PathLike) -> list[str]:
    """Read the per-node URL metadata file: line i is the URL of node i."""
    with open(source, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def symmetrize(g: DirectedGraph) -> DirectedGraph:
    """Add the reverse of every arc; already-symmetric graphs come back equal."""
    src, dst = g.arc_array()
    return DirectedGraph.from_arcs(
        np.concatenate([src, dst]), np.concatenate([dst, src]), n=g.n)


def transpose(g: DirectedGraph) -> DirectedGraph:
    """Reverse every arc; arc count is preserved."""
    src, dst = g.arc_array()
    return DirectedGraph.from_arcs(dst, src, n=g.n)


def is_ranking(order: np.ndarray, n: int) -> bool:
    """True iff ``order`` is a permutation of 0..n-1."""
    order = np.asarray(order)
    return len(order) == n and np.array_equal(np.sort(order), np.arange(n))


def apply_removal(g: DirectedGraph, order, theta: float) -> RemovalOutcome:
    """Delete nodes in ranking order until >= theta*m arcs are gone.

    Deleting a node charges every incident arc (out and in) not charged
    by an earlier deletion, so each arc is counted exactly once and
    deleting all nodes charges exactly m.  The prefix is minimal: the
    previous prefix was still below the theta*m target.  theta=0 removes
    nothing; theta=1 empties the graph entirely (every node removed),
    since stopping at "all arcs gone" would always strand isolated
    leftovers.

    Raises:
        ValueError: theta outside [0, 1], or ``order`` not a permutation
            of the graph's nodes.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    order = np.asarray(order, dtype=np.int64)
    if not is_ranking(order, g.n):
        raise ValueError("order is not a permutation of the graph's nodes")

    n, m = g.n, g.m
    removed = np.zeros(n, dtype=bool)
    if theta == 0.0:
        return RemovalOutcome(g, order[:0], removed, 0, 0.0)
    remove_all = theta == 1.0
    if m == 0 and not remove_all:
        # zero arcs removed already meets any theta*0 target
        return RemovalOutcome(g, order[:0], removed, 0, 1.0)

    tg = transpose(g)
    removed_arcs = 0
    count = 0
    for x in order:
        if not remove_all and removed_arcs / m >= theta:
            break
        out_live = int(np.count_nonzero(~removed[g.successors(x)]))
        in_live = int(np.count_nonzero(~removed[tg.successors(x)]))
        removed[x] = True
        removed_arcs += out_live + in_live
        count += 1
    removed_ids = order[:count]

    src, dst = g.arc_array()
    keep = ~removed[src] & ~removed[dst]
    surviving = DirectedGraph.from_arcs(src[keep], dst[keep], n=n)
    fraction = removed_arcs / m if m > 0 else 1.0
    return RemovalOutcome(surviving, removed_ids, removed, removed_arcs, fraction)
