"""HyperLogLog cardinality sketches, scalar and per-node banked.

A counter is 2^p byte registers plus a 64-bit seed.  Inserting an
element hashes it (seeded splitmix64), uses the top p hash bits as a
register index and writes max(register, 1 + leading zeros of the
remaining 64-p bits).  Registers only ever grow, so the union of two
counters is the registerwise maximum and iterated unions converge.

The estimator is the classic one: harmonic-mean raw estimate
alpha_r * r^2 / sum(2^-reg), switched to linear counting
r * ln(r / zero_registers) in the small range (raw <= 2.5r with some
register still zero).  No large-range correction: cardinalities here
are node counts, far below 2^32.

Standard error is about 1.04/sqrt(2^p); the default elsewhere in this
package is p=7 (128 registers, ~9.2%).
"""
from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_C1 = 0x9E3779B97F4A7C15
_C2 = 0xBF58476D1CE4E5B9
_C3 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One splitmix64 avalanche step on a 64-bit integer."""
    x = (x + _C1) & _MASK64
    x = ((x ^ (x >> 30)) * _C2) & _MASK64
    x = ((x ^ (x >> 27)) * _C3) & _MASK64
    return x ^ (x >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64; bit-identical to the scalar version."""
    x = x.astype(np.uint64, copy=True)
    x += np.uint64(_C1)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_C2)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_C3)
    return x ^ (x >> np.uint64(31))


def _alpha(r: int) -> float:
    if r == 16:
        return 0.673
    if r == 32:
        return 0.697
    if r == 64:
        return 0.709
    return 0.7213 / (1.0 + 1.079 / r)


def _hash_elements(elements: np.ndarray, seed: int) -> np.ndarray:
    """Seeded 64-bit hashes of the elements (seed mixed in before hashing)."""
    mixed = elements.astype(np.uint64) ^ np.uint64(splitmix64(seed & _MASK64))
    return splitmix64_array(mixed)


def _split(hashes: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Split 64-bit hashes into (top-p-bit index, rank of remaining bits)."""
    width = 64 - p
    idx = (hashes >> np.uint64(width)).astype(np.int64)
    w = hashes & np.uint64((1 << width) - 1)
    # bit length of w via shift cascade, then rank = width - bitlen + 1
    bitlen = np.zeros(w.shape, dtype=np.uint64)
    v = w.copy()
    for s in (32, 16, 8, 4, 2, 1):
        big = v >= np.uint64(1 << s)
        bitlen[big] += np.uint64(s)
        v[big] >>= np.uint64(s)
    bitlen += v  # +1 where any bit set
    rank = (width + 1 - bitlen.astype(np.int64)).astype(np.uint8)
    return idx, rank


def _estimate_rows(registers: np.ndarray, p: int) -> np.ndarray:
    """Cardinality estimate for each row of a (k, 2^p) register block."""
    r = 1 << p
    pow2 = np.power(2.0, -np.arange(64, dtype=np.float64))
    denom = pow2[registers].sum(axis=1)
    raw = _alpha(r) * r * r / denom
    zeros = np.count_nonzero(registers == 0, axis=1)
    small = (raw <= 2.5 * r) & (zeros > 0)
    if small.any():
        lin = r * np.log(r / np.maximum(zeros, 1))
        raw = np.where(small, lin, raw)
    return raw


class HllCounter:
    """A single HyperLogLog counter with 2^p registers and a fixed seed."""

    __slots__ = ("p", "seed", "registers")

    def __init__(self, p: int = 7, seed: int = 0,
                 registers: np.ndarray | None = None):
        if not 4 <= p <= 16:
            raise ValueError(f"p must be in 4..16, got {p}")
        self.p = p
        self.seed = seed & _MASK64
        r = 1 << p
        if registers is None:
            registers = np.zeros(r, dtype=np.uint8)
        else:
            registers = np.asarray(registers, dtype=np.uint8).copy()
            if registers.shape != (r,):
                raise ValueError("register block has wrong size")
        self.registers = registers

    @property
    def num_registers(self) -> int:
        return 1 << self.p

    def add(self, element: int) -> "HllCounter":
        """Insert a 64-bit element id; returns self for chaining."""
        h = splitmix64((element & _MASK64) ^ splitmix64(self.seed))
        width = 64 - self.p
        idx = h >> width
        w = h & ((1 << width) - 1)
        rank = width - w.bit_length() + 1
        if rank > self.registers[idx]:
            self.registers[idx] = rank
        return self

    def union(self, other: "HllCounter") -> "HllCounter":
        """Registerwise maximum; both counters must share p and seed."""
        if self.p != other.p or self.seed != other.seed:
            raise ValueError("cannot union counters with different p or seed")
        return HllCounter(self.p, self.seed,
                          np.maximum(self.registers, other.registers))

    def estimate(self) -> float:
        return float(_estimate_rows(self.registers[None, :], self.p)[0])

    def to_hex(self) -> str:
        """Registers as hex text, for debug dumps and test fixtures."""
        return self.registers.tobytes().hex()

    @classmethod
    def from_hex(cls, p: int, seed: int, text: str) -> "HllCounter":
        return cls(p, seed, np.frombuffer(bytes.fromhex(text), dtype=np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, HllCounter):
            return NotImplemented
        return (self.p == other.p and self.seed == other.seed
                and np.array_equal(self.registers, other.registers))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"HllCounter(p={self.p}, seed={self.seed:#x})"


def union(a: HllCounter, b: HllCounter) -> HllCounter:
    return a.union(b)


class CounterArray:
    """One HyperLogLog counter per graph node, stored as an (n, 2^p) block.

    All counters share p and the seed, so cross-node unions are
    well-defined.  The register block is plain uint8; the neighbourhood
    iteration reads one frozen generation and writes the next.
    """

    __slots__ = ("n", "p", "seed", "registers")

    def __init__(self, n: int, p: int = 7, seed: int = 0):
        if not 4 <= p <= 16:
            raise ValueError(f"p must be in 4..16, got {p}")
        self.n = n
        self.p = p
        self.seed = seed & _MASK64
        self.registers = np.zeros((n, 1 << p), dtype=np.uint8)

    def insert_singletons(self, nodes: np.ndarray) -> None:
        """Add each listed node id to its own counter."""
        nodes = np.asarray(nodes, dtype=np.uint64)
        hashes = _hash_elements(nodes, self.seed)
        idx, rank = _split(hashes, self.p)
        rows = nodes.astype(np.int64)
        np.maximum.at(self.registers, (rows, idx), rank)

    def counter(self, i: int) -> HllCounter:
        """Copy of node i's counter as a standalone HllCounter."""
        return HllCounter(self.p, self.seed, self.registers[i])

    def estimate_rows(self, rows: np.ndarray | None = None) -> np.ndarray:
        block = self.registers if rows is None else self.registers[rows]
        return _estimate_rows(block, self.p)
