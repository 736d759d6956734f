"""Maximize detection probabilities over the rescaling c and the shift d.

The objective is screened on a uniform grid, every interior local maximum of
the grid is refined with a golden-section search, and the best refined point
wins. Objectives are log-probabilities so that tiny values keep their
ordering.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from . import probability as pb

GRID = 256
XTOL = 1e-8


class OptimizationError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationResult:
    c_star: float
    d_star: float
    pr_star: float
    max_squeezing_db: float
    evaluations: int
    multimodal: bool = False
    feasible: bool = True
    on_boundary: bool = False

    @property
    def log_pr_star(self) -> float:
        return math.log(self.pr_star) if self.pr_star > 0 else -math.inf

    def as_dict(self) -> dict:
        return {
            "c_star": self.c_star,
            "d_star": self.d_star,
            "pr_star": self.pr_star,
            "max_squeezing_db": self.max_squeezing_db,
            "evaluations": self.evaluations,
            "multimodal": self.multimodal,
            "feasible": self.feasible,
            "on_boundary": self.on_boundary,
        }


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GBSMATCH_THREADS", "1")))
    except ValueError:
        return 1


def _maximize_1d(logf: Callable, lo: float, hi: float, grid: int = GRID, closed_upper: bool = False):
    """Return (x_star, logf_star, evaluations, multimodal, at_upper).

    ``logf`` is vectorized. With ``closed_upper`` the upper end is a feasible
    point (a constraint boundary) and is itself a candidate.
    """
    if not hi > lo:
        raise OptimizationError("empty search interval")
    if closed_upper:
        xs = lo + (hi - lo) * np.arange(1, grid + 1) / grid
    else:
        xs = lo + (hi - lo) * np.arange(1, grid + 1) / (grid + 1)
    ys = np.asarray(logf(xs), dtype=float)
    evals = grid
    if not np.any(np.isfinite(ys)):
        raise OptimizationError("objective is zero on the whole grid")
    ys = np.where(np.isfinite(ys), ys, -np.inf)
    peaks = [i for i in range(grid) if (i == 0 or ys[i] >= ys[i - 1]) and (i == grid - 1 or ys[i] > ys[i + 1])]
    step = xs[1] - xs[0] if grid > 1 else hi - lo
    best_x, best_y, at_upper = None, -np.inf, False
    for i in peaks:
        if closed_upper and i == grid - 1:
            x, y, upper = float(xs[i]), float(ys[i]), True
        else:
            a = float(xs[i - 1]) if i > 0 else lo
            b = float(xs[i + 1]) if i < grid - 1 else (hi if not closed_upper else float(xs[i]))
            if b <= a:
                a, b = float(xs[i]) - step, float(xs[i]) + step
            x, y, upper = float(xs[i]), float(ys[i]), False
            if a < xs[i] < b:
                try:
                    res = optimize.minimize_scalar(
                        lambda v: -float(logf(np.array([v]))[0]),
                        bracket=(a, float(xs[i]), b),
                        method="golden",
                        tol=XTOL,
                    )
                    evals += int(res.nfev)
                    x, y = float(res.x), float(-res.fun)
                except ValueError:
                    pass
            if not (lo < x < hi) or y < ys[i]:
                x, y = float(xs[i]), float(ys[i])
        if y > best_y:
            best_x, best_y, at_upper = x, y, upper
    return best_x, best_y, evals, len(peaks) > 1, at_upper


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


def graph_objective(g, mode: str = "pure"):
    """(log-probability in c, c_upper, lambda_max) for the all-ones pattern of ``g``."""
    from .encoder import joint_spectra
    from .graph import spectrum

    haf = pb.graph_hafnian(g)
    haf = haf.exact if haf.exact is not None else haf.approx
    m = g.n_vertices // 2
    if mode == "pure":
        spec = spectrum(g)
        lam = spec.eigenvalues
        c_upper = 1.0 / spec.max_abs

        def logf(c):
            return pb.log_pr_pure(lam, c, haf, m)

        return logf, c_upper, spec.max_abs
    if mode == "mixed":
        f, h = joint_spectra(g)
        lam_max = float(np.max(np.abs(np.concatenate([h + f, h - f]))))

        def logf(c):
            return pb.log_pr_mixed(f, h, c, haf, m)

        return logf, 1.0 / lam_max, lam_max
    raise OptimizationError(f"unknown mode {mode!r}")


def optimize_c(target, c_bounds=None, mode: str = "pure", grid: int = GRID,
               closed_upper: bool = False, lambda_max: float | None = None) -> OptimizationResult:
    """Maximize the probability over c.

    ``target`` is a Graph (all-ones pattern, ``mode`` pure or mixed) or a
    vectorized callable returning log-probabilities, in which case
    ``c_bounds`` is required.
    """
    if callable(target):
        if c_bounds is None:
            raise OptimizationError("c_bounds is required for a callable objective")
        logf = target
    else:
        logf, c_upper, lambda_max = graph_objective(target, mode)
        if c_bounds is None:
            c_bounds = (0.0, c_upper)
    lo, hi = map(float, c_bounds)
    x, y, evals, multi, upper = _maximize_1d(logf, lo, hi, grid, closed_upper)
    db = pb.max_squeezing_db_at(lambda_max, x) if lambda_max is not None else math.nan
    return OptimizationResult(x, 0.0, math.exp(y), db, evals, multi, True, upper)


def _inner_c(m, n, family, d, budget_t=None, grid=GRID):
    lam = float(pb.extended_lambda_max(m, n, d, family))
    hi = 1.0 / lam
    closed = False
    if budget_t is not None and budget_t / lam < hi:
        hi, closed = budget_t / lam, True

    def logf(c):
        return pb.log_pr_extended(m, n, c, d, family)

    x, y, evals, multi, upper = _maximize_1d(logf, 0.0, hi, grid, closed)
    return x, y, evals, multi, upper and closed, lam


def optimize_cd(m: int, n: int, family: str = "complete", d_bounds=None, d_grid: int = 64,
                c_grid: int = GRID, budget_db: float | None = None, threads: int | None = None) -> OptimizationResult:
    """Maximize the extended-family probability over (c, d).

    ``d`` is the subtracted diagonal shift; the default search range is
    ``[0, 2nM - 1]``. For every probed d the best c is found by
    :func:`optimize_c`'s refinement, and the resulting profile in d is refined
    the same way. ``budget_db`` caps the largest single-mode squeezing.
    """
    big = 2 * n * m
    lo, hi = (0.0, float(big - 1)) if d_bounds is None else map(float, d_bounds)
    t = None
    if budget_db is not None:
        if budget_db <= 0:
            return OptimizationResult(0.0, 0.0, 0.0, 0.0, 0, feasible=False)
        b = 10 ** (budget_db / 10)
        t = (b - 1) / (b + 1)
    threads = default_threads() if threads is None else threads
    evals = 0

    def profile(d):
        nonlocal evals
        x, y, e, _, _, _ = _inner_c(m, n, family, float(d), t, c_grid)
        evals += e
        return y

    def profile_vec(ds):
        ds = np.atleast_1d(ds)
        if threads > 1 and len(ds) > 1:
            with ThreadPoolExecutor(threads) as pool:
                return np.array(list(pool.map(profile, ds)))
        return np.array([profile(d) for d in ds])

    if hi > lo:
        d_star, _, _, multi, _ = _maximize_1d(profile_vec, lo, hi, d_grid, closed_upper=False)
        # the ends of the d range are feasible too
        for end in (lo, hi):
            if profile(end) > profile(d_star):
                d_star = end
    else:
        d_star, multi = lo, False
    c_star, y, e, _, on_boundary, lam = _inner_c(m, n, family, d_star, t, c_grid)
    evals += e
    db = float(pb.max_squeezing_db_at(lam, c_star))
    return OptimizationResult(c_star, float(d_star), math.exp(y), db, evals, multi, True, on_boundary)


def max_squeezing_db(m: int, n: int) -> float:
    """Squeezing at the (c, d) optimum of the extended complete family, in dB."""
    if m < 1 or n < 1:
        raise OptimizationError("m and n must be >= 1")
    a = math.sqrt((2 * m + 1) * (n + 1))
    b = math.sqrt(2 * m * (n + 1) - 1)
    return 10 * math.log10((a + b) / (a - b))


def pr_at_squeezing_budget(m: int, n: int, budget_db: float, family: str = "complete") -> OptimizationResult:
    """Best extended-family probability with every squeezer at most ``budget_db``.

    A non-positive budget is infeasible and returns ``pr_star = 0`` with
    ``feasible = False``.
    """
    return optimize_cd(m, n, family, budget_db=budget_db)
