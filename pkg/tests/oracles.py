"""Independent reference computations used by the tests.

Nothing here calls into the pairing enumeration or the closed-form
probability code of the package; each oracle is computed a different way.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.stats import ortho_group, unitary_group

from gbsmatch import circuit as ci


# ---------------------------------------------------------------------------
# Perfect matchings by first-row expansion, tabulated over all graphs
# ---------------------------------------------------------------------------


def _edge_index(n: int) -> dict:
    iu, ju = np.triu_indices(n, 1)
    return {(int(i), int(j)): e for e, (i, j) in enumerate(zip(iu, ju))}


@lru_cache(maxsize=None)
def expansion_table(n: int) -> np.ndarray:
    """Perfect-matching count of every labeled graph on ``n`` vertices.

    Masks use the edge order of ``np.triu_indices(n, 1)``, so the first
    ``n - 1`` bits are the edges of vertex 0. Expanding along vertex 0,
    ``pm(G) = sum_j [0 ~ j] pm(G - 0 - j)``; the inner counts only depend on
    the bits of edges among vertices ``1..n-1``, so they are looked up once
    per high part and combined with a matrix product over the low part.
    """
    if n == 0:
        return np.ones(1, dtype=np.int64)
    sub_table = expansion_table(n - 2)
    idx = _edge_index(n)
    sub_idx = _edge_index(n - 2)
    n_low = n - 1
    n_high = len(idx) - n_low
    high = np.arange(1 << n_high, dtype=np.int64)
    lookups = np.empty((1 << n_high, n_low), dtype=np.int64)
    for j in range(1, n):
        rest = [v for v in range(1, n) if v != j]
        sub = np.zeros_like(high)
        for (a, b), e_sub in sub_idx.items():
            e = idx[(rest[a], rest[b])] - n_low
            sub |= ((high >> e) & 1) << e_sub
        lookups[:, j - 1] = sub_table[sub]
    low = np.arange(1 << n_low)
    bits = ((low[None, :] >> np.arange(n_low)[:, None]) & 1).astype(np.int64)
    return (lookups @ bits).reshape(-1)


def expansion_table_chunks(n: int, chunk: int = 1 << 14):
    """Yield ``(start, counts)`` slices of :func:`expansion_table` for ``n = 8``
    without holding the int64 table in memory."""
    sub_table = expansion_table(n - 2)
    idx = _edge_index(n)
    sub_idx = _edge_index(n - 2)
    n_low = n - 1
    n_high = len(idx) - n_low
    low = np.arange(1 << n_low)
    bits = ((low[None, :] >> np.arange(n_low)[:, None]) & 1).astype(np.int16)
    plans = []
    for j in range(1, n):
        rest = [v for v in range(1, n) if v != j]
        plans.append([(idx[(rest[a], rest[b])] - n_low, e_sub) for (a, b), e_sub in sub_idx.items()])
    for h0 in range(0, 1 << n_high, chunk):
        high = np.arange(h0, min(h0 + chunk, 1 << n_high), dtype=np.int64)
        lookups = np.empty((len(high), n_low), dtype=np.int16)
        for col, plan in enumerate(plans):
            sub = np.zeros_like(high)
            for e, e_sub in plan:
                sub |= ((high >> e) & 1) << e_sub
            lookups[:, col] = sub_table[sub]
        yield h0 << n_low, (lookups @ bits).reshape(-1)


def adjacency_from_mask(n: int, mask: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.int64)
    for (i, j), e in _edge_index(n).items():
        if mask >> e & 1:
            a[i, j] = a[j, i] = 1
    return a


def haf_laplace(a) -> float:
    """Plain recursive hafnian over nested lists (no memo, no numpy)."""
    a = [list(map(float, row)) for row in np.asarray(a)]

    def rec(idx):
        if not idx:
            return 1.0
        i, rest = idx[0], idx[1:]
        return sum(a[i][j] * rec(rest[:k] + rest[k + 1 :]) for k, j in enumerate(rest))

    return rec(list(range(len(a))))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def k4() -> np.ndarray:
    return np.ones((4, 4)) - np.eye(4)


def complete(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def random_encodable(m: int, rng: np.random.Generator) -> np.ndarray:
    """Random 2m x 2m matrix [[A11, A12], [A12, A11]] with commuting blocks
    and positive semidefinite A12, built from a shared eigenbasis."""
    v = ortho_group.rvs(m, random_state=rng) if m > 1 else np.ones((1, 1))
    f = rng.uniform(-1.5, 1.5, m)
    h = rng.uniform(0.0, 1.5, m)
    a11 = v @ np.diag(f) @ v.T
    a12 = v @ np.diag(h) @ v.T
    a11 = (a11 + a11.T) / 2
    a12 = (a12 + a12.T) / 2
    return np.block([[a11, a12], [a12, a11]])


def random_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(1j * rng.uniform(0, 2 * np.pi, (1, 1)))


# ---------------------------------------------------------------------------
# Gaussian-state references
# ---------------------------------------------------------------------------


def sigma_heisenberg(a: np.ndarray) -> np.ndarray:
    """Dense (I - X A)^{-1} - I/2 written out with explicit blocks."""
    n = a.shape[0]
    m = n // 2
    x = np.zeros((n, n))
    x[:m, m:] = np.eye(m)
    x[m:, :m] = np.eye(m)
    return np.linalg.solve(np.eye(n) - x @ a, np.eye(n)) - np.eye(n) / 2


def heisenberg_to_quadrature(s: np.ndarray) -> np.ndarray:
    """Interleaved (x1, p1, ...) covariance from the (a, a^dag) one."""
    m = s.shape[0] // 2
    w = np.zeros((2 * m, 2 * m), dtype=complex)
    for k in range(m):
        w[k, 2 * k] = w[m + k, 2 * k] = 1 / math.sqrt(2)
        w[k, 2 * k + 1] = 1j / math.sqrt(2)
        w[m + k, 2 * k + 1] = -1j / math.sqrt(2)
    q = np.linalg.inv(w) @ s @ np.linalg.inv(w).conj().T
    assert np.max(np.abs(q.imag)) < 1e-10
    return q.real


def symplectic_eigs_quadrature(q: np.ndarray) -> np.ndarray:
    m = q.shape[0] // 2
    om = np.kron(np.eye(m), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.abs(np.linalg.eigvals(1j * om @ q))
    return np.sort(ev)[::-1][::2]


def k4_mixed_nu(c: float) -> float:
    return 0.5 * math.sqrt((1 + 3 * c) / (1 - 3 * c) * (1 + c) / (1 - c))


def k4_sigma_heisenberg(c):
    """Closed-form entries of sigma_cA for K4 in the Heisenberg basis."""
    diag = -(3 * c**3 + c**2 + c - 1) / (2 * (c - 1) * (3 * c**2 + 2 * c - 1))
    off = c / (-3 * c**2 - 2 * c + 1)
    cross = 2 * c**2 / (3 * c**3 - c**2 - 3 * c + 1)
    return np.array(
        [
            [diag, off, cross, off],
            [off, diag, off, cross],
            [cross, off, diag, off],
            [off, cross, off, diag],
        ]
    )


def cm_example(c):
    """sigma of c(K4 + K4) from its printed C/D block form."""
    g = (1 - 4 * c**2 - 9 * c**4) / 2
    cc = np.full((4, 4), 2 * c**2)
    np.fill_diagonal(cc, g)
    dd = np.full((4, 4), c * (1 - 3 * c**2))
    np.fill_diagonal(dd, 6 * c**3)
    return np.block([[cc, dd], [dd, cc]]) / ((1 - c**2) * (1 - 9 * c**2))


# ---------------------------------------------------------------------------
# Printed doubled-K4 interferometer
# ---------------------------------------------------------------------------

S2 = math.sqrt(2)
W = (1 - 1j) / 2  # the recurring entry (1/2 - i/2)


def k4_multiport():
    """The 4x4 interferometer T printed for the doubled K4 circuit."""
    return np.array(
        [
            [W / S2, W / S2, W / S2, W / S2],
            [-W, 0, 0, W],
            [-W / math.sqrt(3), 0, 2 * W / math.sqrt(3), -W / math.sqrt(3)],
            [-W / math.sqrt(6), W * math.sqrt(1.5), -W / math.sqrt(6), -W / math.sqrt(6)],
        ]
    )


def k4_printed_mesh():
    """The printed six-angle factorization as a gate list in application order."""
    th = [
        -2 * math.atan(1 / 3),
        -math.pi / 2,
        -2 * math.atan(math.sqrt(5)),
        -2 * math.atan(math.sqrt(1.5)),
        -math.pi,
        -math.pi / 3,
    ]
    delta = ci.PhaseLayer((-math.pi / 4, -math.pi / 4, 3 * math.pi / 4, -math.pi / 4))
    return [
        ci.BeamSplitterGate(0, 1, th[0]),
        ci.BeamSplitterGate(2, 3, th[1]),
        ci.BeamSplitterGate(1, 2, th[2]),
        ci.BeamSplitterGate(0, 1, th[3]),
        delta,
        ci.BeamSplitterGate(2, 3, -th[4]),
        ci.BeamSplitterGate(1, 2, -th[5]),
    ]
