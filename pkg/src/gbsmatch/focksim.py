"""Truncated Fock-space state-vector simulation of small circuits.

This module is an oracle: it never computes a hafnian. States are complex
tensors with one axis per mode. Single-mode squeezed and two-mode squeezed
vacua are written down from their series; squeezers, beam splitters and
phases act through matrix exponentials of their quadratic generators built on
a padded space and sliced back to the cutoff, so matrix elements between
retained levels are exact up to the padding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .circuit import BeamSplitterGate, CircuitSpec, PhaseLayer
from .probability import DetectionPattern

log = logging.getLogger(__name__)

MAX_MODES = 4
MAX_CUTOFF = 10
LEAKAGE_WARN = 1e-6


class FockError(ValueError):
    pass


@dataclass(frozen=True)
class FockState:
    """State vector of ``modes`` modes, each truncated to ``cutoff`` levels."""

    amplitudes: np.ndarray
    leakage: float = 0.0

    @property
    def modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def truncated(self) -> bool:
        """True when more than ``LEAKAGE_WARN`` of the norm sits beyond the cutoff."""
        return self.leakage > LEAKAGE_WARN

    def probability(self, counts) -> float:
        return float(abs(self.amplitudes[tuple(counts)]) ** 2)

    def tensor(self, other: "FockState") -> "FockState":
        amp = np.multiply.outer(self.amplitudes, other.amplitudes)
        return FockState(amp, 1 - (1 - self.leakage) * (1 - other.leakage))


def _tracked(amp: np.ndarray, prior: float) -> FockState:
    # truncated gates are contractions: any norm they lose is leakage
    lost = 1 - float(np.sum(np.abs(amp) ** 2))
    return FockState(amp, max(prior, lost, 0.0))


def _check_budget(modes: int, cutoff: int):
    if modes > MAX_MODES:
        raise FockError(f"{modes} modes exceed the oracle budget of {MAX_MODES}")
    if cutoff > MAX_CUTOFF or cutoff < 1:
        raise FockError(f"cutoff {cutoff} outside [1, {MAX_CUTOFF}]")


def vacuum_state(modes: int, cutoff: int) -> FockState:
    amp = np.zeros((cutoff,) * modes, dtype=complex)
    amp[(0,) * modes] = 1.0
    return FockState(amp)


def squeezed_vacuum_state(r: float, cutoff: int) -> FockState:
    """exp(r/2 (a^2 - a^dag^2)) |0>; r > 0 squeezes x."""
    amp = np.zeros(cutoff, dtype=complex)
    t = math.tanh(r)
    for k in range(0, (cutoff + 1) // 2):
        n = 2 * k
        amp[n] = (-t) ** k * math.sqrt(math.factorial(n)) / (2**k * math.factorial(k))
    amp /= math.sqrt(math.cosh(r))
    return FockState(amp, max(0.0, 1 - float(np.sum(np.abs(amp) ** 2))))


def two_mode_squeezed_state(xi: float, cutoff: int) -> FockState:
    """exp(xi (a^dag b^dag - a b)) |0,0> = sum_n tanh^n xi / cosh xi |n, n>."""
    amp = np.zeros((cutoff, cutoff), dtype=complex)
    t = math.tanh(xi)
    for n in range(cutoff):
        amp[n, n] = t**n / math.cosh(xi)
    return FockState(amp, max(0.0, 1 - float(np.sum(np.abs(amp) ** 2))))


def thermal_density(nu: float, cutoff: int) -> np.ndarray:
    """Diagonal of the thermal state with covariance nu I (mean photons nu - 1/2)."""
    q = (2 * nu - 1) / (2 * nu + 1)
    return 2 / (2 * nu + 1) * q ** np.arange(cutoff)


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------


def _lower(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


@lru_cache(maxsize=256)
def _squeezer_matrix(r: float, cutoff: int) -> np.ndarray:
    pad = 2 * cutoff + 20
    a = _lower(pad)
    u = linalg.expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    return u[:cutoff, :cutoff]


def _two_mode_matrix(log_t: np.ndarray, cutoff: int) -> np.ndarray:
    """exp(sum_ij a_i^dag (log T)_ij a_j) on two modes, sliced to the cutoff."""
    pad = cutoff
    a = _lower(pad)
    eye = np.eye(pad)
    ops = [np.kron(a, eye), np.kron(eye, a)]
    gen = sum(log_t[i, j] * ops[i].conj().T @ ops[j] for i in range(2) for j in range(2))
    # number conserving: the block with n_1 + n_2 < cutoff is closed under gen
    u = linalg.expm(gen).reshape(pad, pad, pad, pad)
    return u[:cutoff, :cutoff, :cutoff, :cutoff]


def _apply_single(amp: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    out = np.tensordot(u, amp, axes=([1], [mode]))
    return np.moveaxis(out, 0, mode)


def _apply_pair(amp: np.ndarray, u4: np.ndarray, i: int, j: int) -> np.ndarray:
    out = np.tensordot(u4, amp, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def apply_squeezer(state: FockState, r: float, mode: int) -> FockState:
    amp = _apply_single(state.amplitudes, _squeezer_matrix(float(r), state.cutoff), mode)
    return _tracked(amp, state.leakage)


def apply_gates_fock(state: FockState, gates) -> FockState:
    """Apply beam splitters and phase layers, in application order.

    A gate with 2x2 matrix T acts as the Fock unitary exp(a^dag (log T) a),
    which maps a -> T a in the Heisenberg picture.
    """
    amp = state.amplitudes
    d = state.cutoff
    for g in gates:
        if isinstance(g, PhaseLayer):
            for k, p in enumerate(g.phases):
                if p:
                    amp = _apply_single(amp, np.diag(np.exp(1j * p * np.arange(d))), k)
        elif isinstance(g, BeamSplitterGate):
            if not (0 <= g.i < amp.ndim and 0 <= g.j < amp.ndim):
                raise FockError(f"gate modes ({g.i}, {g.j}) out of range")
            amp = _apply_pair(amp, _two_mode_matrix(linalg.logm(g.matrix()), d), g.i, g.j)
        else:
            raise FockError(f"unsupported gate {g!r}")
    return _tracked(amp, state.leakage)


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------


def prepare_state(spec: CircuitSpec, cutoff: int) -> FockState:
    """System modes first, then ancillas, as in :class:`CircuitSpec`."""
    _check_budget(spec.modes, cutoff)
    purified = {p.target: p for p in spec.purifiers}
    for k, s in enumerate(spec.inputs):
        if s.kind in ("thermal", "squeezed_thermal") and k not in purified:
            raise FockError(f"thermal input on mode {k} has no purifier")
    amp = vacuum_state(spec.modes, cutoff).amplitudes
    leak = 0.0
    for p in spec.purifiers:
        tms = two_mode_squeezed_state(p.xi, cutoff)
        leak = 1 - (1 - leak) * (1 - tms.leakage)
        amp = _merge_pair(amp, tms.amplitudes, p.target, p.ancilla)
    state = FockState(amp, leak)
    for k, s in enumerate(spec.inputs):
        if s.r:
            if k in purified:
                state = apply_squeezer(state, s.r, k)
            else:
                sq = squeezed_vacuum_state(s.r, cutoff)
                state = FockState(_merge_single(state.amplitudes, sq.amplitudes, k),
                                  1 - (1 - state.leakage) * (1 - sq.leakage))
    return state


def _merge_single(amp: np.ndarray, single: np.ndarray, mode: int) -> np.ndarray:
    """Replace vacuum on ``mode`` by the single-mode state ``single``."""
    base = np.take(amp, 0, axis=mode)
    return np.moveaxis(np.multiply.outer(single, base), 0, mode)


def _merge_pair(amp: np.ndarray, pair: np.ndarray, i: int, j: int) -> np.ndarray:
    """Replace vacuum on modes (i, j) by the two-mode state ``pair[n_i, n_j]``."""
    lo, hi = sorted((i, j))
    base = np.take(np.take(amp, 0, axis=hi), 0, axis=lo)
    p = pair if i < j else pair.T
    out = np.multiply.outer(p, base)
    return np.moveaxis(out, [0, 1], [lo, hi])


def run_circuit(spec: CircuitSpec, cutoff: int) -> FockState:
    state = apply_gates_fock(prepare_state(spec, cutoff), spec.mesh)
    if state.truncated:
        log.warning("truncation leakage %.3g at cutoff %d exceeds %.0e", state.leakage, cutoff, LEAKAGE_WARN)
    return state


def pattern_probability_fock(spec: CircuitSpec, pattern: DetectionPattern, cutoff: int = MAX_CUTOFF) -> float:
    """Probability of a system-mode photon pattern, summed over ancilla outcomes."""
    if pattern.modes != spec.system_modes:
        raise FockError(f"pattern has {pattern.modes} entries for {spec.system_modes} system modes")
    state = run_circuit(spec, cutoff)
    sub = state.amplitudes[tuple(pattern.counts)]
    return float(np.sum(np.abs(sub) ** 2))


def fock_covariance(state: FockState) -> np.ndarray:
    """Interleaved quadrature covariance from the amplitudes (zero displacement assumed)."""
    m, d = state.modes, state.cutoff
    amp = state.amplitudes / math.sqrt(state.norm)
    a = _lower(d)

    def apply(op, psi, k):
        return _apply_single(psi, op, k)

    def expect(psi_l, psi_r):
        return complex(np.vdot(psi_l, psi_r))

    sig = np.zeros((2 * m, 2 * m))
    # quadrature operators x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2)
    quads = []
    for k in range(m):
        quads.append((k, (a + a.conj().T) / math.sqrt(2)))
        quads.append((k, (a - a.conj().T) / (1j * math.sqrt(2))))
    applied = [apply(op, amp, k) for k, op in quads]
    for u in range(2 * m):
        for v in range(u, 2 * m):
            val = expect(applied[u], applied[v]).real
            sig[u, v] = sig[v, u] = val
    return sig
