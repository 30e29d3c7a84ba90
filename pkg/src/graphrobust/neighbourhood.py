"""Neighbourhood function and distance distribution of a directed graph.

The neighbourhood function N(t) counts ordered pairs (x, y) with y
reachable from x in at most t steps, including the n self-pairs at
t = 0.  Two engines compute it:

* ``exact_neighbourhood`` runs a breadth-first search from every node,
  64 sources at a time packed into uint64 bit masks so the whole sweep
  is a handful of vectorized passes per level.
* ``approx_neighbourhood`` keeps one HyperLogLog counter per node,
  initialized with the node itself, and repeatedly unions every node's
  counter with its successors' counters; N(t) is the sum of the
  cardinality estimates after iteration t.  Registers are monotone and
  bounded, so iterating until no register changes always terminates.

Both engines accept a boolean ``active`` mask to skip nodes deleted by a
removal: such nodes contribute neither self-pairs nor counters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DirectedGraph, transpose
from .hll import CounterArray


@dataclass(frozen=True)
class NeighbourhoodFunction:
    """N(0)..N(T) plus the node count that produced it.

    values is non-decreasing and stops at the last productive distance:
    the first repeated value is trimmed away, so T is the largest
    observed distance (T = 0 for arcless graphs).
    """

    values: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) == 0:
            raise ValueError("neighbourhood function must be a non-empty 1-d array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def last_index(self) -> int:
        return len(self.values) - 1

    @property
    def reachable_pairs(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class DistanceDistribution:
    """Cumulative and density form of a neighbourhood function.

    cumulative[t] = N(t)/N(T); density[t] = cumulative step at t (the
    t = 0 entry is the self-pair mass).  mean_distance averages over
    pairs at distance >= 1 and is None when no such pair exists.
    """

    cumulative: np.ndarray
    density: np.ndarray
    reachable_pairs: float
    mean_distance: float | None

    def positive_density(self) -> np.ndarray:
        """Density conditioned on distance >= 1 (self-pairs excluded)."""
        rest = 1.0 - self.density[0]
        if rest <= 0.0:
            raise ValueError("no pairs at distance >= 1")
        return self.density[1:] / rest


def exact_neighbourhood(g: DirectedGraph,
                        active: np.ndarray | None = None) -> NeighbourhoodFunction:
    """Exact N(t) by BFS from every (active) node.

    Runs 64 sources per pass using uint64 reachability masks: bit s of
    word[y] says y has been reached from source s.  A step ORs, into
    each node, the words of its in-neighbours; newly set bits are the
    pairs at the current distance.
    """
    n = g.n
    if active is None:
        sources = np.arange(n, dtype=np.int64)
    else:
        sources = np.flatnonzero(np.asarray(active, dtype=bool))
    if len(sources) == 0:
        return NeighbourhoodFunction(np.zeros(1), 0)

    tg = transpose(g)
    indeg = np.diff(tg.indptr)
    rows = np.flatnonzero(indeg > 0)
    starts = tg.indptr[:-1][rows]
    in_src = tg.targets

    hist = [0]
    for lo in range(0, len(sources), 64):
        batch = sources[lo:lo + 64]
        word = np.zeros(n, dtype=np.uint64)
        word[batch] = np.uint64(1) << np.arange(len(batch), dtype=np.uint64)
        hist[0] += len(batch)
        t = 0
        while True:
            contrib = np.bitwise_or.reduceat(word[in_src], starts)
            fresh = contrib & ~word[rows]
            count = int(np.bitwise_count(fresh).sum())
            if count == 0:
                break
            t += 1
            if t == len(hist):
                hist.append(0)
            hist[t] += count
            word[rows] |= contrib
    return NeighbourhoodFunction(np.cumsum(hist, dtype=np.float64), len(sources))


def approx_neighbourhood(g: DirectedGraph, p: int = 7, seed: int = 0,
                         active: np.ndarray | None = None) -> NeighbourhoodFunction:
    """Approximate N(t) via per-node HyperLogLog counters.

    Each iteration replaces every counter by the union of itself and its
    successors' counters (reading only the previous generation), then
    records the summed estimates.  Stops when an iteration changes no
    register anywhere.  Recorded sums pass through a running maximum:
    the true N(t) is non-decreasing because registers are, but the
    estimator's small-range/raw regime switch can dip a little, and a
    monotone output is what the distribution derivation needs.
    Deterministic for a fixed seed.
    """
    if p < 4:
        raise ValueError(f"p must be >= 4, got {p}")
    n = g.n
    if active is None:
        live = np.arange(n, dtype=np.int64)
    else:
        live = np.flatnonzero(np.asarray(active, dtype=bool))
    if len(live) == 0:
        return NeighbourhoodFunction(np.zeros(1), 0)

    bank = CounterArray(n, p=p, seed=seed)
    bank.insert_singletons(live)
    regs = bank.registers

    est = np.zeros(n, dtype=np.float64)
    est[live] = bank.estimate_rows(live)
    values = [float(est[live].sum())]

    outdeg = g.out_degrees()
    rows = np.flatnonzero(outdeg > 0)
    starts = g.indptr[:-1][rows]

    while len(rows):
        gathered = regs[g.targets]            # frozen previous generation
        segmax = np.maximum.reduceat(gathered, starts, axis=0)
        new_rows = np.maximum(regs[rows], segmax)
        changed = (new_rows != regs[rows]).any(axis=1)
        if not changed.any():
            break
        regs[rows] = new_rows
        touched = rows[changed]
        est[touched] = bank.estimate_rows(touched)
        values.append(float(est[live].sum()))

    out = np.maximum.accumulate(np.asarray(values, dtype=np.float64))
    return NeighbourhoodFunction(out, len(live))


def average_runs(runs: list[NeighbourhoodFunction]) -> tuple[NeighbourhoodFunction, np.ndarray]:
    """Pointwise mean of several runs plus per-t relative standard deviation.

    Shorter runs are padded with their final value (a stabilized
    function is constant past T).  rsd is sample std / mean at each t,
    zero wherever the mean is zero, and all-zero for a single run.
    """
    if not runs:
        raise ValueError("no runs to average")
    counts = {nf.n for nf in runs}
    if len(counts) != 1:
        raise ValueError("runs cover different node counts")
    width = max(len(nf.values) for nf in runs)
    stacked = np.empty((len(runs), width), dtype=np.float64)
    for i, nf in enumerate(runs):
        v = nf.values
        stacked[i, :len(v)] = v
        stacked[i, len(v):] = v[-1]
    mean = stacked.mean(axis=0)
    if len(runs) == 1:
        rsd = np.zeros(width)
    else:
        std = stacked.std(axis=0, ddof=1)
        rsd = np.divide(std, mean, out=np.zeros(width), where=mean != 0)
    return NeighbourhoodFunction(mean, runs[0].n), rsd


def distance_distribution(nf: NeighbourhoodFunction) -> DistanceDistribution:
    """Derive H, h and the mean distance from a neighbourhood function.

    Raises:
        ValueError: if the function decreases anywhere or ends at zero
            (no reachable pairs at all).
    """
    v = nf.values
    if np.any(np.diff(v) < 0):
        raise ValueError("neighbourhood function must be non-decreasing")
    total = v[-1]
    if total <= 0:
        raise ValueError("no reachable pairs: distribution undefined")
    cumulative = v / total
    density = np.diff(v, prepend=0.0) / total
    if v[-1] > v[0]:
        steps = np.diff(v)
        ts = np.arange(1, len(v), dtype=np.float64)
        mean = float((ts * steps).sum() / (v[-1] - v[0]))
    else:
        mean = None
    return DistanceDistribution(cumulative, density, float(total), mean)


def nf_to_csv_rows(nf: NeighbourhoodFunction) -> list[tuple[float, float, float, float]]:
    """Rows (t, N(t), H(t), h(t)) ready for a CSV dump."""
    dist = distance_distribution(nf)
    return [(float(t), float(nf.values[t]), float(dist.cumulative[t]), float(dist.density[t]))
            for t in range(len(nf.values))]
