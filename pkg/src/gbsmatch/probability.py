"""Closed-form detection probabilities and their inversion to hafnians.

Every product is accumulated as a sum of logarithms and exponentiated once;
large binomials and double factorials are exact integers converted with
``math.log``. The ``log_*`` helpers are vectorized over ``c`` (and ``d``) so the
optimizer can scan grids without Python loops.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import hafnian as hf


class ProbabilityError(ValueError):
    pass


@dataclass(frozen=True)
class DetectionPattern:
    """One entry per mode, each 0 or 1."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(v) for v in self.counts)
        if any(v not in (0, 1) for v in counts):
            raise ProbabilityError("detection patterns are restricted to 0/1 entries")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def parse(cls, text: str) -> "DetectionPattern":
        text = text.replace(",", " ").split()
        if len(text) == 1 and len(text[0]) > 1:
            text = list(text[0])
        try:
            return cls(tuple(int(t) for t in text))
        except ValueError as exc:
            raise ProbabilityError(f"malformed pattern: {exc}") from exc

    @classmethod
    def ones(cls, modes: int) -> "DetectionPattern":
        return cls((1,) * modes)

    @property
    def modes(self) -> int:
        return len(self.counts)

    @property
    def detected(self) -> list[int]:
        return [i for i, v in enumerate(self.counts) if v]


@dataclass(frozen=True)
class ProbabilityReport:
    """``value = prefactor * haf_factor``.

    ``prefactor`` is ``1/sqrt(det sigma_Q)``; ``haf_factor`` is the hafnian of
    the rescaled matrix. ``direct`` holds the photon-pattern route (hafnian of
    the submatrix over ``sqrt(det sigma_Q)``) when it was evaluated.
    """

    value: float
    prefactor: float
    haf_factor: float
    recovered_haf: float
    log_value: float
    mode: str
    direct: float | None = None

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "value": self.value,
            "log_value": self.log_value,
            "prefactor": self.prefactor,
            "haf_factor": self.haf_factor,
            "recovered_haf": self.recovered_haf,
            "direct": self.direct,
        }


@dataclass(frozen=True)
class ExtendedFamilySpec:
    """Extended graph family sampled through the doubled pure encoding.

    ``d`` is subtracted from the diagonal: the encoded matrix is
    ``c (A - d I)`` for each copy.
    """

    m: int
    n: int
    c: float
    d: float = 0.0
    family: str = "complete"

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ProbabilityError("extension needs m, n >= 1")
        if self.family not in ("complete", "one_edge_removed"):
            raise ProbabilityError(f"unknown family {self.family!r}")
        if self.family == "one_edge_removed" and self.m < 2:
            raise ProbabilityError("one-edge-removed family needs m >= 2")

    @property
    def k(self) -> int:
        return 2 * self.n

    @property
    def ell(self) -> int:
        return self.n * (2 * self.m - 2)

    @property
    def size(self) -> int:
        return 2 * self.n * self.m

    @property
    def c_upper(self) -> float:
        return 1.0 / extended_lambda_max(self.m, self.n, self.d, self.family)


# ---------------------------------------------------------------------------
# Determinants
# ---------------------------------------------------------------------------


def _check_range(x, what: str):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise ProbabilityError(f"{what}: c is outside the valid range (|c lambda| must stay below 1)")


def log_det_sigma_q_pure(lam, c):
    lam = np.asarray(lam, dtype=float)
    c = np.asarray(c, dtype=float)
    x = np.multiply.outer(c, lam)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.sum(np.log1p(-(x**2)), axis=-1)
    return np.where(np.all(np.abs(x) < 1, axis=-1), out, np.inf)


def det_sigma_q_pure(lam, c: float) -> float:
    """det sigma_Q of the doubled encoding of a matrix with eigenvalues ``lam``.

    Equals the product of ``1/(1 - c^2 lam_k^2)`` over the eigenvalues of a
    single copy.
    """
    _check_range(c * np.asarray(lam, dtype=float), "det_sigma_q_pure")
    return float(np.exp(log_det_sigma_q_pure(lam, c)))


def _mixed_factors(f, h, c):
    f = np.asarray(f, dtype=float)
    h = np.asarray(h, dtype=float)
    c = np.asarray(c, dtype=float)[..., None]
    return 1 - c * (f + h), 1 + c * (f - h)


def log_det_sigma_q_mixed(f, h, c):
    u, v = _mixed_factors(f, h, c)
    ok = np.all((u > 0) & (v > 0), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.sum(np.log(u) + np.log(v), axis=-1)
    return np.where(ok, out, np.inf)


def det_sigma_q_mixed(f, h, c: float) -> float:
    """Product of ``1/([1 - c(f+h)][1 + c(f-h)])`` over the joint eigenmodes."""
    u, v = _mixed_factors(f, h, c)
    if np.any(u <= 0) or np.any(v <= 0):
        raise ProbabilityError("det_sigma_q_mixed: c is outside the valid range")
    return float(np.exp(log_det_sigma_q_mixed(f, h, c)))


# ---------------------------------------------------------------------------
# All-ones probabilities
# ---------------------------------------------------------------------------


def _log_abs(x) -> float:
    x = abs(x)
    return -math.inf if x == 0 else math.log(x)


def log_pr_pure(lam, c, haf, m: int):
    """log of prod sqrt(1 - c^2 lam^2) * c^{2m} * haf^2, vectorized in c."""
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore"):
        return -0.5 * log_det_sigma_q_pure(lam, c) + 2 * m * np.log(c) + 2 * _log_abs(haf)


def log_pr_mixed(f, h, c, haf, m: int):
    """log of prod sqrt([1-c(f+h)][1+c(f-h)]) * c^m * haf, vectorized in c."""
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore"):
        return -0.5 * log_det_sigma_q_mixed(f, h, c) + m * np.log(c) + _log_abs(haf)


def graph_hafnian(g, threads: int = 1) -> hf.HafValue:
    """Hafnian of a graph: analytic for the known families, enumerated otherwise."""
    if not g.matchable:
        raise ProbabilityError("an odd vertex count has no perfect matchings to count")
    if g.family == "complete":
        return hf.HafValue.from_int(hf.pm_count_complete(g.n_vertices // 2))
    if g.family == "one_edge_removed":
        return hf.HafValue.from_int(hf.pm_count_one_edge_removed(g.n_vertices // 2))
    return hf.haf_bruteforce(g.matrix, threads=threads)


def _report(log_value, log_prefactor, log_haf_factor, recovered, mode, direct=None):
    return ProbabilityReport(
        value=float(np.exp(log_value)),
        prefactor=float(np.exp(log_prefactor)),
        haf_factor=float(np.exp(log_haf_factor)),
        recovered_haf=float(recovered),
        log_value=float(log_value),
        mode=mode,
        direct=direct,
    )


def pr_all_ones_pure(g, c: float, direct: bool | None = None) -> ProbabilityReport:
    """Probability of one photon in every mode of the doubled encoding c(A + A).

    ``direct`` evaluates the photon-pattern route as well; by default it runs
    when the doubled matrix is small enough to enumerate.
    """
    from .graph import spectrum

    spec = spectrum(g)
    if c <= 0 or c * spec.max_abs >= 1:
        bound = math.inf if spec.max_abs == 0 else 1 / spec.max_abs
        raise ProbabilityError(f"c={c} outside (0, {bound:.6g}) for the doubled encoding")
    m = g.n_vertices // 2
    haf = graph_hafnian(g)
    log_pref = -0.5 * float(log_det_sigma_q_pure(spec.eigenvalues, c))
    log_hf = 2 * m * math.log(c) + 2 * haf.log_abs
    log_value = log_pref + log_hf
    value = math.exp(log_value)
    recovered = haf_from_pr_pure(value, spec.eigenvalues, c, m) if value > 0 else 0.0
    d = None
    if direct is None:
        direct = g.adjacency is not None and 2 * g.n_vertices <= hf.MAX_BRUTEFORCE_DIM
    if direct:
        from .encoder import sigma_from_matrix

        a = c * np.asarray(g.matrix)
        z = np.zeros_like(a)
        sigma = sigma_from_matrix(np.block([[a, z], [z, a]]))
        d = pr_pattern(sigma, DetectionPattern.ones(g.n_vertices))
    return _report(log_value, log_pref, log_hf, recovered, "pure", d)


def pr_all_ones_mixed(g, c: float, direct: bool | None = None) -> ProbabilityReport:
    """Probability of one photon in every mode of the direct encoding cA."""
    from .encoder import EncodingError, joint_spectra, sigma_from_matrix

    f, h = joint_spectra(g)
    u, v = _mixed_factors(f, h, c)
    if c <= 0 or np.any(u <= 0) or np.any(v <= 0):
        raise ProbabilityError(f"c={c} outside the valid range for the mixed encoding")
    if np.any(h < -1e-10):
        raise EncodingError("a12_psd", "A12 has a negative eigenvalue; cA is not a valid covariance")
    m = g.n_vertices // 2
    haf = graph_hafnian(g)
    log_pref = -0.5 * float(log_det_sigma_q_mixed(f, h, c))
    log_hf = m * math.log(c) + haf.log_abs
    log_value = log_pref + log_hf
    value = math.exp(log_value)
    recovered = haf_from_pr_mixed(value, f, h, c, m) if value > 0 else 0.0
    d = None
    if direct is None:
        direct = g.adjacency is not None and g.n_vertices <= hf.MAX_BRUTEFORCE_DIM
    if direct:
        sigma = sigma_from_matrix(c * np.asarray(g.matrix))
        d = pr_pattern(sigma, DetectionPattern.ones(m))
    return _report(log_value, log_pref, log_hf, recovered, "mixed", d)


def pr_pattern(sigma, pattern: DetectionPattern, threads: int = 1) -> float:
    """Probability of a 0/1 photon pattern: haf(A_S) / sqrt(det sigma_Q).

    ``A`` is recovered from ``sigma`` and ``A_S`` keeps the rows and columns
    of the detected modes in both the annihilation and creation blocks.
    """
    from .encoder import matrix_from_sigma
    from .symplectic import Basis, CovarianceMatrix, basis_convert

    if not isinstance(sigma, CovarianceMatrix):
        sigma = CovarianceMatrix(np.asarray(sigma), Basis.HEISENBERG)
    sigma = basis_convert(sigma, Basis.HEISENBERG)
    m = sigma.modes
    if pattern.modes != m:
        raise ProbabilityError(f"pattern has {pattern.modes} entries for {m} modes")
    sq = sigma.entries + np.eye(2 * m) / 2
    sign, logdet = np.linalg.slogdet(sq)
    if sign <= 0:
        raise ProbabilityError("sigma_Q is not positive definite")
    a = matrix_from_sigma(sigma)
    s = pattern.detected
    idx = s + [i + m for i in s]
    sub = a[np.ix_(idx, idx)]
    if len(idx) > hf.MAX_BRUTEFORCE_DIM:
        raise ProbabilityError(f"submatrix of dimension {len(idx)} is beyond the enumeration bound")
    haf = hf.haf_bruteforce(sub, threads=threads).approx if idx else 1.0
    return float(haf * math.exp(-0.5 * logdet))


def haf_from_pr_pure(pr: float, lam, c: float, m: int) -> float:
    """Invert the pure all-ones probability: c^{-m} sqrt(pr) prod (1 - c^2 lam^2)^{-1/4}."""
    if pr <= 0:
        raise ProbabilityError("probability must be positive to invert")
    lam = np.asarray(lam, dtype=float)
    log = -m * math.log(c) + 0.5 * math.log(pr) - 0.25 * float(np.sum(np.log1p(-(c * lam) ** 2)))
    return _exp_or_inf(log)


def haf_from_pr_mixed(pr: float, f, h, c: float, m: int) -> float:
    """Invert the mixed all-ones probability."""
    if pr <= 0:
        raise ProbabilityError("probability must be positive to invert")
    log_pref = -0.5 * float(log_det_sigma_q_mixed(f, h, c))
    return _exp_or_inf(math.log(pr) - log_pref - m * math.log(c))


def _exp_or_inf(log: float) -> float:
    # hafnians of large families exceed the float range; their logs do not
    return math.exp(log) if log < 709.0 else math.inf


# ---------------------------------------------------------------------------
# Extended families
# ---------------------------------------------------------------------------


def spec_w(k: int, ell: int, d: float) -> np.ndarray:
    """Spectrum of [[0_k, J], [J, K_ell]] - d I, sorted descending."""
    if k < 1 or ell < 1:
        raise ProbabilityError("block sizes must be >= 1")
    root = math.sqrt(1 - 2 * ell + ell * ell + 4 * ell * k)
    out = np.concatenate(
        [
            np.full(ell - 1, -1.0 - d),
            np.full(k - 1, -float(d)),
            [0.5 * (-1 - 2 * d + ell + root), 0.5 * (-1 - 2 * d + ell - root)],
        ]
    )
    return np.sort(out)[::-1]


def spec_kext(m: int, n: int, c: float, d: float) -> np.ndarray:
    """The 4nM values +-c(1+d) (2nM-1 times each) and +-c(2nM-1-d), descending.

    These are the eigenvalues of X c((A_K - dI) + (A_K - dI)) for K = K_{2nM}.
    """
    big = 2 * n * m
    out = np.concatenate(
        [
            np.full(big - 1, c * (1 + d)),
            np.full(big - 1, -c * (1 + d)),
            [c * (big - 1 - d), -c * (big - 1 - d)],
        ]
    )
    return np.sort(out)[::-1]


def extended_lambda_max(m: int, n: int, d, family: str = "complete"):
    """Largest |eigenvalue| of one shifted copy, vectorized in d."""
    d = np.asarray(d, dtype=float)
    if family == "complete":
        big = 2 * n * m
        out = np.maximum(np.abs(big - 1 - d), np.abs(1 + d))
    else:
        k, ell = 2 * n, n * (2 * m - 2)
        root = math.sqrt(1 - 2 * ell + ell * ell + 4 * ell * k)
        cands = [np.abs(0.5 * (-1 - 2 * d + ell + root)), np.abs(0.5 * (-1 - 2 * d + ell - root))]
        if ell > 1:
            cands.append(np.abs(1 + d))
        if k > 1:
            cands.append(np.abs(d))
        out = np.maximum.reduce(cands)
    return out if out.ndim else float(out)


def log_det_kext(m: int, n: int, c, d):
    big = 2 * n * m
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    a = c * (big - 1 - d)
    b = c * (1 + d)
    ok = (np.abs(a) < 1) & (np.abs(b) < 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -(np.log1p(-(a**2)) + (big - 1) * np.log1p(-(b**2)))
    return np.where(ok, out, np.inf)


def det_kext(m: int, n: int, c: float, d: float) -> float:
    """det sigma_Q for the doubled, shifted K_{2nM}."""
    v = float(log_det_kext(m, n, c, d))
    if not np.isfinite(v):
        raise ProbabilityError("det_kext: c outside the valid range")
    return math.exp(v)


def _radicals(k: int, ell: int, d):
    root = math.sqrt(1 - 2 * ell + ell * ell + 4 * ell * k)
    base = ell - 1 - 2 * np.asarray(d, dtype=float)
    return base + root, base - root


def log_det_rext(m: int, n: int, c, d):
    k, ell = 2 * n, n * (2 * m - 2)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    xp, xm = _radicals(k, ell, d)
    terms = [(k - 1, c * d), (ell - 1, c * (1 + d)), (1, c * xp / 2), (1, c * xm / 2)]
    ok = np.ones(np.broadcast(c, d).shape, dtype=bool)
    total = np.zeros(ok.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        for mult, x in terms:
            if mult == 0:
                continue
            ok &= np.abs(x) < 1
            total = total - mult * np.log1p(-(x**2))
    return np.where(ok, total, np.inf)


def det_rext(m: int, n: int, c: float, d: float) -> float:
    """det sigma_Q for the doubled, shifted inflated one-edge-removed graph.

    16 / [(1-c^2 d^2)^{k-1} (1-c^2(1+d)^2)^{l-1} (4-c^2 x_+^2)(4-c^2 x_-^2)]
    with x_+- = l - 1 - 2d +- sqrt(1 - 2l + l^2 + 4lk).
    """
    v = float(log_det_rext(m, n, c, d))
    if not np.isfinite(v):
        raise ProbabilityError("det_rext: c outside the valid range")
    return math.exp(v)


@lru_cache(maxsize=None)
def log_count_complete(m: int, n: int) -> float:
    """log of C(2nM, 2M) ((2M-1)!!)^2."""
    return math.log(math.comb(2 * n * m, 2 * m)) + 2 * math.log(hf.double_factorial(2 * m - 1))


@lru_cache(maxsize=None)
def log_count_one_edge_removed(m: int, n: int) -> float:
    """log of C(2n, 2) C(n(2M-2), 2M-2) ((2M-3)!!(2M-2))^2."""
    patterns = math.comb(2 * n, 2) * math.comb(n * (2 * m - 2), 2 * m - 2)
    return math.log(patterns) + 2 * math.log(hf.pm_count_one_edge_removed(m))


def log_pr_extended(m: int, n: int, c, d, family: str = "complete"):
    """Vectorized log-probability of the extended family (``-inf`` off-range)."""
    c = np.asarray(c, dtype=float)
    if family == "complete":
        logdet, count = log_det_kext(m, n, c, d), log_count_complete(m, n)
    else:
        logdet, count = log_det_rext(m, n, c, d), log_count_one_edge_removed(m, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = count - 0.5 * logdet + 2 * m * np.log(c)
    return np.where(np.isfinite(logdet) & (c > 0), out, -np.inf)


def _pr_extended(spec: ExtendedFamilySpec, family: str) -> float:
    if spec.family != family:
        raise ProbabilityError(f"expected a {family} family spec, got {spec.family}")
    if spec.c <= 0 or spec.c >= spec.c_upper:
        raise ProbabilityError(f"c={spec.c} outside (0, {spec.c_upper:.6g})")
    return float(np.exp(log_pr_extended(spec.m, spec.n, spec.c, spec.d, family)))


def pr_extended_complete(spec: ExtendedFamilySpec) -> float:
    """Total probability of the K_{2M} patterns inside the doubled, shifted K_{2nM}."""
    return _pr_extended(spec, "complete")


def pr_extended_one_edge_removed(spec: ExtendedFamilySpec) -> float:
    """Total probability of the R_{2M} patterns inside the doubled inflated graph."""
    return _pr_extended(spec, "one_edge_removed")


def max_squeezing_db_at(lambda_max, c):
    """Largest single-mode squeezing in dB, 10 log10 e^{2r} with e^{2r}=(1+c l)/(1-c l)."""
    x = np.asarray(c, dtype=float) * np.asarray(lambda_max, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10 * np.log10((1 + x) / (1 - x))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def format_csv(columns: Sequence[str], rows: Iterable[Sequence[float]], params: dict | None = None) -> str:
    """CSV text with parameter comment lines (``# key=value``) before the header."""
    buf = io.StringIO()
    for key, value in (params or {}).items():
        buf.write(f"# {key}={value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_csv(text: str) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`format_csv`: (params, columns, data)."""
    params = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            params[key] = value
        elif line.strip():
            lines.append(line)
    rows = list(csv.reader(lines))
    data = np.array([[float(x) for x in r] for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, len(rows[0])))
    return params, rows[0], data
