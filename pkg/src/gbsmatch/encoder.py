"""Encode adjacency matrices as Gaussian covariance matrices.

Heisenberg basis throughout: ``sigma = (I - X A)^{-1} - I/2`` and its inverse
``A = X (I - (sigma + I/2)^{-1})``. A matrix with blocks ``[[A11, A12], [A21, A22]]``
encodes directly (a mixed state) when ``A11 = A22``, ``A12 = A21``, the two blocks
commute and ``A12`` is positive semidefinite. Any symmetric matrix encodes as a
pure state after doubling it to ``A + A`` (direct sum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import graph as gr
from .symplectic import (
    Basis,
    CovarianceMatrix,
    basis_convert,
    symplectic_eigenvalues,
    xmat,
)

TOL = 1e-10
BOUNDARY_GUARD = 1e-9


class EncodingError(ValueError):
    """Encoding refused; ``condition`` names the failed requirement."""

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class EncodabilityReport:
    block_symmetric: bool
    commuting: bool
    a12_psd: bool
    c_upper: float

    @property
    def encodable(self) -> bool:
        return self.block_symmetric and self.commuting and self.a12_psd

    @property
    def failed(self) -> list[str]:
        names = ("block_symmetric", "commuting", "a12_psd")
        return [n for n in names if not getattr(self, n)]


@dataclass(frozen=True)
class MixedEncoding:
    """Direct encoding of ``c A`` on M = dim/2 modes.

    ``f`` and ``h`` are the joint eigenvalues of A11 and A12 with eigenvectors
    in the columns of ``modes_basis``; ``r`` is signed so that ``r > 0`` means
    the x quadrature of that eigenmode is squeezed.
    """

    source: gr.Graph
    c: float
    sigma: CovarianceMatrix
    f: np.ndarray
    h: np.ndarray
    nu: np.ndarray
    r: np.ndarray
    xi: np.ndarray
    modes_basis: np.ndarray

    @property
    def modes(self) -> int:
        return len(self.f)

    @property
    def n_thermal(self) -> int:
        return int(np.sum(self.xi > 0))

    def as_dict(self) -> dict:
        return {
            "mode": "mixed",
            "c": self.c,
            "f": self.f.tolist(),
            "h": self.h.tolist(),
            "nu": self.nu.tolist(),
            "r": self.r.tolist(),
            "xi": self.xi.tolist(),
            "n_thermal": self.n_thermal,
        }


@dataclass(frozen=True)
class PureEncoding:
    """Doubled encoding of ``c (A + A)`` on 2M = dim modes."""

    source: gr.Graph
    c: float
    sigma: CovarianceMatrix
    lam: np.ndarray
    r: np.ndarray
    nu: np.ndarray
    modes_basis: np.ndarray

    @property
    def modes(self) -> int:
        return len(self.lam)

    def as_dict(self) -> dict:
        return {
            "mode": "pure",
            "c": self.c,
            "lambda": self.lam.tolist(),
            "r": self.r.tolist(),
            "nu": self.nu.tolist(),
        }


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, gr.Graph):
        return np.asarray(a.matrix, dtype=float)
    return np.asarray(a, dtype=float)


def _blocks(a: np.ndarray):
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise EncodingError("even_dimension", "encoding needs a square matrix of even dimension")
    m = a.shape[0] // 2
    return a[:m, :m], a[:m, m:], a[m:, :m], a[m:, m:]


def c_upper_of(a) -> float:
    """1 / max |eig(X A)|; infinite for the zero matrix."""
    a = _as_matrix(a)
    lam = np.abs(np.linalg.eigvals(xmat(a.shape[0] // 2) @ a))
    top = float(np.max(lam, initial=0.0))
    return math.inf if top == 0 else 1.0 / top


def check_mixed_conditions(a) -> EncodabilityReport:
    a = _as_matrix(a)
    a11, a12, a21, a22 = _blocks(a)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    tol = TOL * scale
    sym = bool(np.max(np.abs(a11 - a22), initial=0) <= tol and np.max(np.abs(a12 - a21), initial=0) <= tol)
    comm = bool(np.max(np.abs(a11 @ a12 - a12 @ a11), initial=0) <= tol * scale)
    psd = bool(np.min(np.linalg.eigvalsh((a12 + a12.T) / 2), initial=0) >= -tol) if a12.size else True
    return EncodabilityReport(sym, comm, psd, c_upper_of(a))


def sigma_from_matrix(a) -> CovarianceMatrix:
    """sigma = (I - X A)^{-1} - I/2 in the Heisenberg basis."""
    a = _as_matrix(a)
    n = a.shape[0]
    if n % 2:
        raise EncodingError("even_dimension", "encoding needs an even dimension")
    mat = np.eye(n) - xmat(n // 2) @ a
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e14:
        raise EncodingError("c_range", f"I - XA is singular (condition number {cond:.3e}); c is at or beyond 1/lambda_1")
    return CovarianceMatrix(np.linalg.inv(mat) - np.eye(n) / 2, Basis.HEISENBERG)


def matrix_from_sigma(sigma) -> np.ndarray:
    """A = X (I - (sigma + I/2)^{-1})."""
    if not isinstance(sigma, CovarianceMatrix):
        sigma = CovarianceMatrix(np.asarray(sigma), Basis.HEISENBERG)
    s = basis_convert(sigma, Basis.HEISENBERG).entries
    n = s.shape[0]
    sq = s + np.eye(n) / 2
    if np.linalg.cond(sq) > 1e14:
        raise EncodingError("sigma_q", "sigma_Q is singular")
    a = xmat(n // 2) @ (np.eye(n) - np.linalg.inv(sq))
    return (a + a.T) / 2


def simultaneous_eigh(a11: np.ndarray, a12: np.ndarray, seed: int = 0):
    """Orthogonal V diagonalizing two commuting symmetric matrices.

    Diagonalizes ``A11 + t A12`` for a random ``t`` and checks both; when that
    fails (accidental degeneracy) it diagonalizes A12 and then A11 inside each
    eigenspace of A12. Returns ``(f, h, V)``.
    """
    m = a11.shape[0]
    scale = max(1.0, float(np.max(np.abs(a11), initial=0)), float(np.max(np.abs(a12), initial=0)))
    t = np.random.default_rng(seed).uniform(0.5, 1.5)
    _, v = np.linalg.eigh(a11 + t * a12)

    def offdiag(x):
        y = v.T @ x @ v
        return float(np.max(np.abs(y - np.diag(np.diag(y))), initial=0))

    if max(offdiag(a11), offdiag(a12)) > 1e-9 * scale:
        w, u = np.linalg.eigh(a12)
        cols = []
        start = 0
        while start < m:
            stop = start + 1
            while stop < m and abs(w[stop] - w[start]) <= 1e-9 * scale:
                stop += 1
            block = u[:, start:stop]
            _, q = np.linalg.eigh(block.T @ a11 @ block)
            cols.append(block @ q)
            start = stop
        v = np.hstack(cols)
    f = np.einsum("ij,jk,ki->i", v.T, a11, v)
    h = np.einsum("ij,jk,ki->i", v.T, a12, v)
    # strongest A12 weight first, then by f descending
    order = np.lexsort((-f, -np.round(h, 12)))
    return f[order], h[order], v[:, order]


def joint_spectra(g) -> tuple[np.ndarray, np.ndarray]:
    """Joint eigenvalues (f, h) of (A11, A12), analytic for complete graphs."""
    if isinstance(g, gr.Graph) and g.family == "complete" and (g.adjacency is None or g.n_vertices > 512):
        if g.n_vertices % 2:
            raise EncodingError("even_dimension", "encoding needs an even dimension")
        m = g.n_vertices // 2
        f = np.concatenate([[m - 1.0], np.full(m - 1, -1.0)]) + g.shift
        h = np.concatenate([[float(m)], np.zeros(m - 1)])
        return f, h
    a = _as_matrix(g)
    rep = check_mixed_conditions(a)
    if not rep.encodable:
        raise EncodingError(rep.failed[0], f"mixed encoding conditions violated: {', '.join(rep.failed)}")
    a11, a12, _, _ = _blocks(a)
    f, h, _ = simultaneous_eigh(a11, a12)
    return f, h


def _check_c(c: float, c_upper: float):
    if not c > 0:
        raise EncodingError("c_range", f"c must be positive, got {c}")
    if c > (1 - BOUNDARY_GUARD) * c_upper:
        raise EncodingError("c_range", f"c={c} must stay below c_upper={c_upper:.12g}")


def encode_mixed(a, c: float) -> MixedEncoding:
    g = a if isinstance(a, gr.Graph) else gr.from_matrix(a)
    mat = _as_matrix(g)
    rep = check_mixed_conditions(mat)
    if not rep.encodable:
        raise EncodingError(rep.failed[0], f"mixed encoding conditions violated: {', '.join(rep.failed)}")
    _check_c(c, rep.c_upper)
    a11, a12, _, _ = _blocks(mat)
    f, h, v = simultaneous_eigh(a11, a12)
    h = np.where(np.abs(h) < 1e-12, 0.0, h)
    cf, ch = c * np.abs(f), c * h
    nu = 0.5 * np.sqrt(((1 + ch) ** 2 - (c * f) ** 2) / ((1 - ch) ** 2 - (c * f) ** 2))
    r4 = ((1 + cf) ** 2 - ch**2) / ((1 - cf) ** 2 - ch**2)
    # f < 0 squeezes x of the eigenmode, f > 0 squeezes p
    r = 0.25 * np.log(r4) * np.where(f > 0, -1.0, 1.0)
    xi = 0.5 * np.arccosh(np.maximum(2 * nu, 1.0))
    sigma = sigma_from_matrix(c * mat)
    return MixedEncoding(g, float(c), sigma, f, h, nu, r, xi, v)


def encode_pure_doubled(a, c: float) -> PureEncoding:
    g = a if isinstance(a, gr.Graph) else gr.from_matrix(a)
    mat = _as_matrix(g)
    lam, v = np.linalg.eigh(mat)
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, v = lam[order], v[:, order]
    top = float(np.max(np.abs(lam), initial=0))
    _check_c(c, math.inf if top == 0 else 1 / top)
    z = np.zeros_like(mat)
    sigma = sigma_from_matrix(c * np.block([[mat, z], [z, mat]]))
    r = 0.5 * np.log((1 + c * np.abs(lam)) / (1 - c * np.abs(lam)))
    nu = symplectic_eigenvalues(sigma)
    if np.max(np.abs(nu - 0.5)) > 1e-9:
        raise EncodingError("purity", f"doubled encoding is not pure (max |nu - 1/2| = {np.max(np.abs(nu - 0.5)):.3e})")
    return PureEncoding(g, float(c), sigma, lam, r, nu, v)


def encode(a, c: float, mode: str = "auto"):
    """Dispatch on ``mode`` in {"mixed", "pure", "auto"}; auto prefers mixed."""
    if mode == "mixed":
        return encode_mixed(a, c)
    if mode == "pure":
        return encode_pure_doubled(a, c)
    if mode != "auto":
        raise ValueError(f"unknown encoding mode {mode!r}")
    mat = _as_matrix(a)
    if mat.shape[0] % 2 == 0 and check_mixed_conditions(mat).encodable:
        return encode_mixed(a, c)
    return encode_pure_doubled(a, c)
