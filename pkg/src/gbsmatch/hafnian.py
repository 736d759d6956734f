"""Hafnians by exhaustive pairing enumeration, plus closed forms.

The enumeration visits each of the (2M-1)!! perfect pairings exactly once:
the smallest unmatched index is paired with every larger unmatched index,
recursively. Pairing tables are built once per dimension and cached.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_BRUTEFORCE_DIM = 16
_CHUNK = 1 << 18


class HafnianError(ValueError):
    pass


@dataclass(frozen=True)
class HafValue:
    """Hafnian value: ``exact`` is set for integer-valued inputs."""

    approx: float
    exact: int | None = None

    def __float__(self):
        return self.approx

    def __int__(self):
        if self.exact is None:
            raise TypeError("hafnian has no exact integer value")
        return self.exact

    def __eq__(self, other):
        if isinstance(other, HafValue):
            if self.exact is not None and other.exact is not None:
                return self.exact == other.exact
            return self.approx == other.approx
        if isinstance(other, int) and self.exact is not None:
            return self.exact == other
        if isinstance(other, (int, float)):
            return self.approx == other
        return NotImplemented

    __hash__ = None

    @classmethod
    def from_int(cls, value: int) -> "HafValue":
        value = int(value)
        try:
            approx = float(value)
        except OverflowError:
            approx = math.inf if value > 0 else -math.inf
        return cls(approx, value)

    @property
    def log_abs(self) -> float:
        """log |haf|, exact-integer based when available (no overflow)."""
        v = self.exact if self.exact is not None else self.approx
        return -math.inf if v == 0 else math.log(abs(v))


def double_factorial(k: int) -> int:
    """k!! for k >= -1, with (-1)!! = 0!! = 1."""
    if k < -1:
        raise ValueError("double factorial needs k >= -1")
    out = 1
    for v in range(k, 1, -2):
        out *= v
    return out


def n_pairings(dim: int) -> int:
    return double_factorial(dim - 1) if dim > 0 else 1


@lru_cache(maxsize=None)
def pairing_table(dim: int) -> np.ndarray:
    """All perfect pairings of ``range(dim)`` as an int8 array (P, dim//2, 2).

    Rows follow the canonical order: the smallest free index is matched
    with each larger free index in increasing order.
    """
    if dim % 2:
        raise HafnianError("pairings need an even number of indices")
    if dim == 0:
        return np.zeros((1, 0, 2), dtype=np.int8)
    sub = pairing_table(dim - 2)
    blocks = []
    for j in range(1, dim):
        rest = np.array([v for v in range(1, dim) if v != j], dtype=np.int8)
        head = np.broadcast_to(np.array([0, j], dtype=np.int8), (len(sub), 1, 2))
        blocks.append(np.concatenate([head, rest[sub]], axis=1))
    table = np.concatenate(blocks, axis=0)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _flat_pairs(dim: int) -> np.ndarray:
    t = pairing_table(dim).astype(np.int32)
    flat = t[:, :, 0] * dim + t[:, :, 1]
    flat.setflags(write=False)
    return flat


def _is_integer_matrix(a: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(a)) and np.all(a == np.round(a)))


def _sum_products(values: np.ndarray, flat: np.ndarray, threads: int) -> float | int:
    """Sum over rows of ``flat`` of the product of the gathered entries."""
    chunks = [flat[i : i + _CHUNK] for i in range(0, len(flat), _CHUNK)]

    def part(idx):
        return values[idx].prod(axis=1).sum()

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(part, chunks))
    else:
        parts = [part(c) for c in chunks]
    return sum(parts[1:], parts[0])


def haf_bruteforce(a, threads: int = 1) -> HafValue:
    """Hafnian of a symmetric matrix of even dimension <= 16.

    Sums the product of paired entries over every perfect pairing. For
    integer-valued input the exact integer is returned alongside the double;
    the ``threads`` argument fans the sum out over independent chunks.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise HafnianError("hafnian needs a square matrix")
    dim = a.shape[0]
    if dim % 2:
        raise HafnianError(f"hafnian needs an even dimension, got {dim}")
    if dim > MAX_BRUTEFORCE_DIM:
        raise HafnianError(f"dimension {dim} exceeds the enumeration bound {MAX_BRUTEFORCE_DIM}")
    if dim == 0:
        return HafValue(1.0, 1)
    flat = _flat_pairs(dim)
    if np.iscomplexobj(a):
        raise HafnianError("only real matrices are supported")
    if _is_integer_matrix(a):
        ai = np.round(a).astype(np.int64)
        biggest = int(np.max(np.abs(ai)))
        # int64 is exact while every partial sum stays below 2**62
        if biggest == 0 or (dim // 2) * math.log2(biggest) + math.log2(len(flat)) < 62:
            exact = int(_sum_products(ai.ravel(), flat, threads))
        else:
            exact = int(_sum_products(np.array(ai.ravel(), dtype=object), flat, threads))
        return HafValue.from_int(exact)
    approx = float(_sum_products(a.astype(float).ravel(), flat, threads))
    return HafValue(approx)


def haf_recursive(a) -> HafValue:
    """Hafnian via first-row expansion haf(A) = sum_j a_0j haf(A without 0, j).

    Independent of :func:`haf_bruteforce`; intended as an oracle for small
    matrices. Memoized over the set of remaining indices.
    """
    a = np.asarray(a)
    dim = a.shape[0]
    if dim % 2:
        raise HafnianError("hafnian needs an even dimension")
    exact = _is_integer_matrix(a)
    entries = [[int(round(x)) if exact else float(x) for x in row] for row in a]

    @lru_cache(maxsize=None)
    def rec(rest: tuple):
        if not rest:
            return 1
        i, others = rest[0], rest[1:]
        total = 0
        for pos, j in enumerate(others):
            if entries[i][j]:
                total += entries[i][j] * rec(others[:pos] + others[pos + 1 :])
        return total

    value = rec(tuple(range(dim)))
    if exact:
        return HafValue.from_int(value)
    return HafValue(float(value))


def pm_count_complete(m: int) -> int:
    """Perfect matchings of K_{2m}: (2m-1)!!."""
    if m < 1:
        raise HafnianError("m must be >= 1")
    return double_factorial(2 * m - 1)


def pm_count_one_edge_removed(m: int) -> int:
    """Perfect matchings of K_{2m} minus one edge: (2m-3)!! (2m-2)."""
    if m < 2:
        raise HafnianError("m must be >= 2")
    return double_factorial(2 * m - 3) * (2 * m - 2)


def haf_scaled(h: HafValue | float, c: float, m: int) -> float:
    """haf(cA) = c^m haf(A) for a 2m x 2m matrix A."""
    return c**m * float(h)


def haf_direct_sum(h1: HafValue, h2: HafValue) -> HafValue:
    """haf(A1 + A2) for a block-diagonal direct sum is the product."""
    if h1.exact is not None and h2.exact is not None:
        return HafValue.from_int(h1.exact * h2.exact)
    return HafValue(h1.approx * h2.approx)


def perfect_matching_counts(n: int) -> np.ndarray:
    """Perfect-matching count of every labeled simple graph on ``n`` vertices.

    Graphs are indexed by an edge bitmask over ``np.triu_indices(n, 1)``
    (bit e set means edge e present). The indicator of the perfect
    matchings in :func:`pairing_table` is summed over all supersets with a
    subset-sum transform, so the whole table costs O(E 2^E) additions.
    """
    if n % 2 or n < 2 or n > 8:
        raise HafnianError("exhaustive tables are available for even n in [2, 8]")
    iu, ju = np.triu_indices(n, 1)
    edge_bit = {(int(i), int(j)): e for e, (i, j) in enumerate(zip(iu, ju))}
    n_edges = len(iu)
    counts = np.zeros(1 << n_edges, dtype=np.uint8)
    for pairing in pairing_table(n):
        mask = 0
        for i, j in pairing:
            mask |= 1 << edge_bit[(int(i), int(j))]
        counts[mask] += 1
    for e in range(n_edges):
        view = counts.reshape(-1, 2, 1 << e)
        view[:, 1, :] += view[:, 0, :]
    return counts
