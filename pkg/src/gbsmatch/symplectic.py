"""Covariance-matrix algebra for M-mode Gaussian states without displacement.

Two operator orderings are used:

* Heisenberg: (a_1, ..., a_M, a_1^dag, ..., a_M^dag), with
  ``sigma[i, j] = <{xi_i, xi_j^dag}>/2``;
* quadrature, interleaved: (x_1, p_1, ..., x_M, p_M) with a = (x + ip)/sqrt(2).

Vacuum is ``I/2`` in both. The symplectic form is ``Omega = (+) [[0, 1], [-1, 0]]``
in the interleaved ordering.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import linalg

EIG_FLOOR = 1e-13


class SymplecticError(ValueError):
    pass


class Basis(enum.Enum):
    HEISENBERG = "heisenberg"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray
    basis: Basis = Basis.HEISENBERG

    def __post_init__(self):
        e = np.array(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] % 2:
            raise SymplecticError("covariance matrix must be square with even dimension")
        if np.iscomplexobj(e):
            if np.max(np.abs(e.imag), initial=0.0) > 1e-10:
                raise SymplecticError("covariance entries must be real")
            e = e.real
        e = e.astype(float)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def modes(self) -> int:
        return self.entries.shape[0] // 2

    def to(self, basis: Basis) -> "CovarianceMatrix":
        return basis_convert(self, basis)


@dataclass(frozen=True)
class ValidityReport:
    symmetric: bool
    positive_definite: bool
    uncertainty_ok: bool
    min_eigenvalue: float
    min_symplectic_eigenvalue: float | None

    @property
    def valid(self) -> bool:
        return self.symmetric and self.positive_definite and self.uncertainty_ok


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``s.T @ sigma @ s = diag(nu_1, nu_1, ..., nu_M, nu_M)`` with ``s`` symplectic."""

    s: np.ndarray
    nu: np.ndarray


@dataclass(frozen=True)
class SymplecticSVD:
    """``s = k @ sigma @ l.T`` with k, l orthogonal symplectic.

    ``sigma`` is diagonal with entries ``(e^{-r_1}, e^{r_1}, ...)`` and
    ``r`` descending, i.e. one single-mode squeezer per mode.
    """

    k: np.ndarray
    sigma: np.ndarray
    l: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return -np.log(np.diag(self.sigma)[::2])


# ---------------------------------------------------------------------------
# Constant matrices
# ---------------------------------------------------------------------------


def omega(m: int) -> np.ndarray:
    return np.kron(np.eye(m), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def xmat(m: int) -> np.ndarray:
    """X_{2M}: swaps the a and a^dag blocks."""
    z = np.zeros((m, m))
    return np.block([[z, np.eye(m)], [np.eye(m), z]])


def zmat(m: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(m), -np.ones(m)]))


def quadrature_to_heisenberg(m: int) -> np.ndarray:
    """Unitary W with xi_heisenberg = W @ xi_quadrature."""
    w = np.zeros((2 * m, 2 * m), dtype=complex)
    s = 1 / np.sqrt(2)
    for j in range(m):
        w[j, 2 * j], w[j, 2 * j + 1] = s, 1j * s
        w[m + j, 2 * j], w[m + j, 2 * j + 1] = s, -1j * s
    return w


def interleave_perm(m: int) -> np.ndarray:
    """Index array mapping interleaved (x1,p1,..) to (x1..xM,p1..pM) order."""
    return np.concatenate([np.arange(0, 2 * m, 2), np.arange(1, 2 * m, 2)])


def to_xxpp(a: np.ndarray) -> np.ndarray:
    p = interleave_perm(a.shape[0] // 2)
    return a[np.ix_(p, p)]


def from_xxpp(a: np.ndarray) -> np.ndarray:
    p = np.argsort(interleave_perm(a.shape[0] // 2))
    return a[np.ix_(p, p)]


def passive_symplectic(t: np.ndarray) -> np.ndarray:
    """Quadrature (interleaved) symplectic of the passive map a -> t @ a."""
    t = np.asarray(t, dtype=complex)
    return from_xxpp(np.block([[t.real, -t.imag], [t.imag, t.real]]))


def unitary_from_passive(k: np.ndarray) -> np.ndarray:
    """Inverse of :func:`passive_symplectic`."""
    kx = to_xxpp(k)
    m = k.shape[0] // 2
    return kx[:m, :m] + 1j * kx[m:, :m]


# ---------------------------------------------------------------------------
# Conversions and checks
# ---------------------------------------------------------------------------


def basis_convert(sigma: CovarianceMatrix, target: Basis) -> CovarianceMatrix:
    if sigma.basis is target:
        return sigma
    w = quadrature_to_heisenberg(sigma.modes)
    if target is Basis.HEISENBERG:
        out = w @ sigma.entries @ w.conj().T
    else:
        out = w.conj().T @ sigma.entries @ w
    if np.max(np.abs(out.imag)) > 1e-10:
        raise SymplecticError("basis conversion left an imaginary residue; input is not a covariance matrix")
    return CovarianceMatrix(out.real, target)


def _as_cov(sigma, basis: Basis) -> CovarianceMatrix:
    if isinstance(sigma, CovarianceMatrix):
        return sigma
    return CovarianceMatrix(np.asarray(sigma), basis)


def symplectic_eigenvalues(sigma) -> np.ndarray:
    """Symplectic eigenvalues, one per mode, descending.

    Heisenberg input uses the spectrum of |Z sigma|, quadrature input the
    spectrum of |i Omega sigma|; both come in +- pairs.
    """
    cov = _as_cov(sigma, Basis.HEISENBERG)
    e = cov.entries
    if np.min(np.linalg.eigvalsh((e + e.T) / 2)) <= 0:
        raise SymplecticError("symplectic eigenvalues need a positive-definite matrix")
    if cov.basis is Basis.HEISENBERG:
        w = np.linalg.eigvals(zmat(cov.modes) @ e)
    else:
        w = np.linalg.eigvals(1j * omega(cov.modes) @ e)
    return np.sort(np.abs(w))[::-1][::2].copy()


def is_valid_covariance(sigma, tol: float = 1e-10) -> ValidityReport:
    cov = _as_cov(sigma, Basis.HEISENBERG)
    e = cov.entries
    symmetric = bool(np.max(np.abs(e - e.T), initial=0.0) <= 1e-12 * max(1.0, np.max(np.abs(e))))
    min_eig = float(np.min(np.linalg.eigvalsh((e + e.T) / 2)))
    pd = min_eig > 0
    nu_min = None
    ok = False
    if pd:
        nu_min = float(np.min(symplectic_eigenvalues(cov)))
        ok = nu_min >= 0.5 - tol
    return ValidityReport(symmetric, pd, ok, min_eig, nu_min)


def sym_power(a: np.ndarray, p: float, floor: float = EIG_FLOOR) -> np.ndarray:
    """a**p for a symmetric positive-definite matrix via eigendecomposition."""
    w, v = np.linalg.eigh((a + a.T) / 2)
    if np.min(w) < floor:
        raise SymplecticError(f"matrix power of a near-singular matrix (min eigenvalue {np.min(w):.3e})")
    return (v * w**p) @ v.T


# ---------------------------------------------------------------------------
# Decompositions
# ---------------------------------------------------------------------------


def real_schur_normal_form(m: np.ndarray, tol: float = 1e-12):
    """Orthogonal q with ``q @ m @ q.T = (+) [[0, k_i], [-k_i, 0]]``, k_i >= 0.

    Returns ``(q, kappas)`` with kappas descending. Odd dimensions end with a
    single zero row.
    """
    m = np.asarray(m, dtype=float)
    scale = max(1.0, np.max(np.abs(m), initial=0.0))
    if np.max(np.abs(m + m.T), initial=0.0) > tol * scale:
        raise SymplecticError("normal form needs an antisymmetric matrix")
    t, z = linalg.schur(m, output="real")
    n = m.shape[0]
    pairs, singles = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-14 * scale:
            kappa = t[i, i + 1]
            cols = (i, i + 1) if kappa > 0 else (i + 1, i)
            pairs.append((abs(kappa), cols))
            i += 2
        else:
            singles.append(i)
            i += 1
    # zero eigenvalues come as 1x1 blocks; pair them up
    for a, b in zip(singles[0::2], singles[1::2]):
        pairs.append((0.0, (a, b)))
    order = sorted(range(len(pairs)), key=lambda k: -pairs[k][0])
    cols = [c for k in order for c in pairs[k][1]]
    if len(singles) % 2:
        cols.append(singles[-1])
    q = z[:, cols].T
    kappas = np.array([pairs[k][0] for k in order])
    return q, kappas


def _canonical_block_signs(s: np.ndarray) -> np.ndarray:
    """Flip each mode's column pair so its largest |x-column| entry is positive.

    A sign flip of both columns of one mode is the rotation by pi, so the
    result stays symplectic.
    """
    s = s.copy()
    for j in range(0, s.shape[1], 2):
        col = s[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            s[:, j : j + 2] *= -1
    return s


def williamson(sigma) -> WilliamsonDecomposition:
    """Williamson normal form of a quadrature-basis positive-definite matrix.

    ``s = sigma^{-1/2} o nu^{1/2}`` where ``o`` brings
    ``sigma^{-1/2} Omega sigma^{-1/2}`` to normal antisymmetric form; the
    block values there are the inverse symplectic eigenvalues.
    """
    cov = _as_cov(sigma, Basis.QUADRATURE).to(Basis.QUADRATURE)
    e = cov.entries
    m = cov.modes
    inv_half = sym_power(e, -0.5)
    anti = inv_half @ omega(m) @ inv_half
    anti = (anti - anti.T) / 2
    q, kappas = real_schur_normal_form(anti)
    if np.min(kappas) < 1e-12:
        raise SymplecticError("degenerate mode in Williamson decomposition (kappa ~ 0)")
    # ascending kappa <=> descending nu
    q = q.reshape(m, 2, -1)[::-1].reshape(2 * m, -1)
    nu = 1.0 / kappas[::-1]
    s = inv_half @ q.T @ np.diag(np.repeat(np.sqrt(nu), 2))
    return WilliamsonDecomposition(_canonical_block_signs(s), nu)


def _unitary_polar(u: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def orthosymplectic_eigh(p: np.ndarray, tol: float = 1e-8):
    """Diagonalize a symmetric positive-definite symplectic matrix.

    Returns ``(k, d)`` with k orthogonal symplectic and
    ``k.T @ p @ k = diag(d)``, ``d = (e^{-r_1}, e^{r_1}, ...)``, r descending.
    The symplectic form pairs the eigenspace of s with that of 1/s, so the
    x-columns are taken from the eigenvalues below one and completed by a
    complex-orthonormal basis of the unit eigenspace.
    """
    m = p.shape[0] // 2
    px = to_xxpp((p + p.T) / 2)
    jx = to_xxpp(omega(m))
    w, v = np.linalg.eigh(px)
    logs = np.log(w)
    n_small = int(np.sum(logs[:m] < -tol))
    xcols = [v[:, i] for i in range(n_small)]
    unit = v[:, n_small : 2 * m - n_small]
    chosen: list[np.ndarray] = []
    remaining = [unit[:, i] for i in range(unit.shape[1])]
    while len(chosen) < m - n_small:
        best, best_norm = None, -1.0
        for vec in remaining:
            res = vec.copy()
            for u in chosen:
                res -= (u @ vec) * u + ((jx @ u) @ vec) * (jx @ u)
            nrm = np.linalg.norm(res)
            if nrm > best_norm:
                best, best_norm = res, nrm
        chosen.append(best / best_norm)
    xcols.extend(chosen)
    x = np.array(xcols).T
    u = _unitary_polar(x[:m] + 1j * x[m:])
    k = passive_symplectic(u)
    d = np.diag(k.T @ p @ k).copy()
    # order modes by squeezing, strongest first
    r = -0.5 * (np.log(d[0::2]) - np.log(d[1::2]))
    order = np.argsort(-r, kind="stable")
    cols = np.stack([2 * order, 2 * order + 1], axis=1).ravel()
    return k[:, cols], d[cols]


def is_symplectic(s: np.ndarray, tol: float = 1e-9) -> bool:
    m = s.shape[0] // 2
    om = omega(m)
    return bool(np.max(np.abs(s.T @ om @ s - om)) < tol * max(1.0, np.linalg.norm(s) ** 2))


def symplectic_svd(s: np.ndarray) -> SymplecticSVD:
    """Euler (Bloch-Messiah) decomposition via the left polar decomposition.

    ``s = p o`` with ``p = (s s^T)^{1/2}``; ``p = k sigma k^T`` is diagonalized
    by an orthogonal symplectic ``k`` and ``l^T = k^T o``.
    """
    s = np.asarray(s, dtype=float)
    if not is_symplectic(s):
        raise SymplecticError("input is not symplectic")
    o, p = linalg.polar(s, side="left")
    k, d = orthosymplectic_eigh(p)
    lt = k.T @ o
    return SymplecticSVD(k, np.diag(d), lt.T)
