"""Optical circuits that prepare encoded covariance matrices.

A circuit is a list of single-mode input states (optionally purified by a
two-mode squeezer with an ancilla), followed by one passive interferometer on
the system modes. The interferometer is stored as a unitary ``T`` acting on
annihilation operators (``a -> T a``) and as a nearest-neighbour mesh of
beam splitters plus a final phase layer.

Gate convention, on modes (i, j)::

    B(theta, phi) = [[e^{i phi} cos(theta/2), -sin(theta/2)],
                     [e^{i phi} sin(theta/2),  cos(theta/2)]]

Gate lists are in application order: the first gate acts first, so the
mesh unitary is ``G_last @ ... @ G_first``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .encoder import MixedEncoding, PureEncoding
from .symplectic import (
    Basis,
    CovarianceMatrix,
    SymplecticError,
    basis_convert,
    orthosymplectic_eigh,
    passive_symplectic,
    symplectic_svd,
    unitary_from_passive,
    williamson,
)

UNITARY_TOL = 1e-10


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class BeamSplitterGate:
    i: int
    j: int
    theta: float
    phi: float = 0.0

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        e = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([[e * c, -s], [e * s, c]], dtype=complex)

    def as_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "theta": self.theta, "phi": self.phi}


@dataclass(frozen=True)
class PhaseLayer:
    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.phases)))


@dataclass(frozen=True)
class InputState:
    """Single-mode input: vacuum, squeezed(r), thermal(nu) or squeezed_thermal(nu, r).

    Squeezing ``r > 0`` reduces the x quadrature: covariance
    ``nu * diag(e^{-2r}, e^{2r})`` with ``nu = 1/2`` for pure states.
    """

    kind: str
    nu: float = 0.5
    r: float = 0.0

    @classmethod
    def make(cls, nu: float, r: float, tol: float = 1e-12) -> "InputState":
        thermal = nu > 0.5 + tol
        squeezed = abs(r) > tol
        if thermal and squeezed:
            return cls("squeezed_thermal", float(nu), float(r))
        if thermal:
            return cls("thermal", float(nu), 0.0)
        if squeezed:
            return cls("squeezed", 0.5, float(r))
        return cls("vacuum")

    def covariance(self) -> np.ndarray:
        return self.nu * np.diag([math.exp(-2 * self.r), math.exp(2 * self.r)])

    def params(self) -> dict:
        return {
            "vacuum": {},
            "squeezed": {"r": self.r},
            "thermal": {"nu": self.nu},
            "squeezed_thermal": {"nu": self.nu, "r": self.r},
        }[self.kind]

    @classmethod
    def from_dict(cls, doc: dict) -> "InputState":
        p = doc.get("params", {})
        kind = doc["kind"]
        if kind not in ("vacuum", "squeezed", "thermal", "squeezed_thermal"):
            raise CircuitError(f"unknown input kind {kind!r}")
        return cls(kind, float(p.get("nu", 0.5)), float(p.get("r", 0.0)))


@dataclass(frozen=True)
class Purifier:
    """Two-mode squeezer exp(xi (a^dag b^dag - a b)) on (target, ancilla)."""

    xi: float
    target: int
    ancilla: int


@dataclass(frozen=True)
class CircuitSpec:
    system_modes: int
    inputs: tuple
    purifiers: tuple
    interferometer: np.ndarray = field(repr=False)
    mesh: tuple = ()
    method: str = ""

    def __post_init__(self):
        t = np.array(self.interferometer, dtype=complex)
        if t.shape != (self.system_modes, self.system_modes):
            raise CircuitError("interferometer size does not match the system modes")
        if np.max(np.abs(t.conj().T @ t - np.eye(len(t))), initial=0) > UNITARY_TOL:
            raise CircuitError("interferometer is not unitary")
        t.setflags(write=False)
        object.__setattr__(self, "interferometer", t)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "purifiers", tuple(self.purifiers))
        object.__setattr__(self, "mesh", tuple(self.mesh))
        if len(self.inputs) != self.system_modes:
            raise CircuitError("one input state per system mode is required")

    @property
    def modes(self) -> int:
        return self.system_modes + len(self.purifiers)

    def to_json(self) -> dict:
        gates = [g for g in self.mesh if isinstance(g, BeamSplitterGate)]
        layers = [g for g in self.mesh if isinstance(g, PhaseLayer)]
        phases = list(layers[-1].phases) if layers else [0.0] * self.system_modes
        t = self.interferometer
        return {
            "modes": self.modes,
            "system_modes": self.system_modes,
            "inputs": [{"kind": s.kind, "params": s.params()} for s in self.inputs],
            "purifiers": [{"xi": p.xi, "target": p.target, "ancilla": p.ancilla} for p in self.purifiers],
            "mesh": [g.as_dict() for g in gates],
            "phases": phases,
            "interferometer": {"real": t.real.tolist(), "imag": t.imag.tolist()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, doc: dict | str) -> "CircuitSpec":
        if isinstance(doc, str):
            doc = json.loads(doc)
        m = int(doc["system_modes"])
        inputs = [InputState.from_dict(d) for d in doc["inputs"]]
        purifiers = [Purifier(float(p["xi"]), int(p["target"]), int(p["ancilla"])) for p in doc["purifiers"]]
        mesh = [BeamSplitterGate(int(g["i"]), int(g["j"]), float(g["theta"]), float(g.get("phi", 0.0))) for g in doc["mesh"]]
        mesh.append(PhaseLayer(doc.get("phases", [0.0] * m)))
        if "interferometer" in doc:
            t = np.array(doc["interferometer"]["real"]) + 1j * np.array(doc["interferometer"]["imag"])
        else:
            t = recompose(mesh, m)
        return cls(m, inputs, purifiers, t, mesh)


# ---------------------------------------------------------------------------
# Mesh decomposition
# ---------------------------------------------------------------------------


def _check_unitary(t: np.ndarray):
    t = np.asarray(t, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise CircuitError("interferometer must be square")
    if np.max(np.abs(t.conj().T @ t - np.eye(len(t))), initial=0) > UNITARY_TOL:
        raise CircuitError("matrix is not unitary within 1e-10")
    return t


def _embed(g: BeamSplitterGate, n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    out[np.ix_([g.i, g.j], [g.i, g.j])] = g.matrix()
    return out


def recompose(gates, n: int | None = None) -> np.ndarray:
    """Unitary of a gate list in application order."""
    gates = list(gates)
    if n is None:
        n = 1 + max([max(g.i, g.j) for g in gates if isinstance(g, BeamSplitterGate)]
                    + [len(g.phases) - 1 for g in gates if isinstance(g, PhaseLayer)], default=-1)
    u = np.eye(n, dtype=complex)
    for g in gates:
        if isinstance(g, PhaseLayer):
            if len(g.phases) != n:
                raise CircuitError("phase layer size does not match the mode count")
            u = g.matrix() @ u
        else:
            if not (0 <= g.i < n and 0 <= g.j < n) or g.i == g.j:
                raise CircuitError(f"gate modes ({g.i}, {g.j}) out of range for {n} modes")
            u = _embed(g, n) @ u
    return u


def _split(m: np.ndarray):
    """Write a 2x2 unitary as diag(e^{ia}, e^{ib}) @ B(theta, phi)."""
    theta = 2 * math.atan2(abs(m[0, 1]), abs(m[1, 1]))
    if abs(m[0, 1]) < 1e-15:
        alpha, beta, phi = np.angle(m[0, 0]), np.angle(m[1, 1]), 0.0
    elif abs(m[1, 1]) < 1e-15:
        alpha, beta, phi = np.angle(-m[0, 1]), np.angle(m[1, 0]), 0.0
    else:
        alpha, beta = np.angle(-m[0, 1]), np.angle(m[1, 1])
        phi = np.angle(m[0, 0]) - alpha
    return float(alpha), float(beta), theta, float(phi)


def clements_decompose(t) -> list:
    """Rectangular nearest-neighbour decomposition of a unitary.

    Returns N(N-1)/2 :class:`BeamSplitterGate` objects followed by one
    :class:`PhaseLayer`, in application order.
    """
    u = _check_unitary(t).copy()
    n = len(u)
    right, left = [], []
    for i in range(n - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, p = n - 1 - j, i - j
                q = p + 1
                theta = 2 * math.atan2(abs(u[row, p]), abs(u[row, q]))
                phi = float(np.angle(u[row, p]) - np.angle(u[row, q])) if abs(u[row, p]) > 0 else 0.0
                g = BeamSplitterGate(p, q, theta, phi)
                u = u @ _embed(g, n).conj().T
                right.append(g)
        else:
            for j in range(1, i + 2):
                q, col = n + j - i - 2, j - 1
                p = q - 1
                theta = 2 * math.atan2(abs(u[q, col]), abs(u[p, col]))
                phi = float(np.angle(-u[q, col]) - np.angle(u[p, col])) if abs(u[q, col]) > 0 else 0.0
                g = BeamSplitterGate(p, q, theta, phi)
                u = _embed(g, n) @ u
                left.append(g)
    # u = L_k ... L_1 T R_1^dag ... R_m^dag is diagonal; push it through the L^dag
    phases = np.angle(np.diag(u)).astype(float)
    moved = []
    for g in reversed(left):
        block = g.matrix().conj().T @ np.diag(np.exp(1j * phases[[g.i, g.j]]))
        alpha, beta, theta, phi = _split(block)
        phases[g.i], phases[g.j] = alpha, beta
        moved.append(BeamSplitterGate(g.i, g.j, theta, phi))
    # T = D B'_1 ... B'_k R_m ... R_1 with B'_1 produced last
    return right + moved + [PhaseLayer(tuple(phases))]


def mesh_gate_count(gates) -> int:
    return sum(1 for g in gates if isinstance(g, BeamSplitterGate))


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def _quadrature(sigma: CovarianceMatrix) -> np.ndarray:
    return basis_convert(sigma, Basis.QUADRATURE).entries


def synthesize_pure(e: PureEncoding) -> CircuitSpec:
    """Squeezed-vacuum inputs followed by a passive network.

    2 sigma (quadrature) is symmetric, positive and symplectic for a pure
    state; its orthosymplectic diagonalization ``K^T (2 sigma) K =
    diag(e^{-2r_1}, e^{2r_1}, ...)`` gives the squeezers and ``K`` the network.
    """
    s = _quadrature(e.sigma)
    k, d = orthosymplectic_eigh(2 * s)
    r = -0.5 * np.log(d[0::2])
    r = np.where(np.abs(r) < 1e-13, 0.0, r)
    t = unitary_from_passive(k)
    inputs = [InputState.make(0.5, float(x)) for x in r]
    return CircuitSpec(len(r), inputs, (), t, clements_decompose(t), "orthosymplectic")


def _thermal_diagonal(tau: np.ndarray, tol: float = 1e-9) -> bool:
    scale = max(1.0, float(np.max(np.abs(tau))))
    off = tau - np.diag(np.diag(tau))
    d = np.diag(tau)
    return bool(np.max(np.abs(off)) < tol * scale and np.max(np.abs(d[0::2] - d[1::2])) < tol * scale)


def _purifiers(nu: np.ndarray, m: int) -> list[Purifier]:
    out = []
    for k, v in enumerate(nu):
        if v > 0.5 + 1e-12:
            out.append(Purifier(0.5 * math.acosh(2 * v), k, m + len(out)))
    return out


def synthesize_mixed(e: MixedEncoding, method: str = "williamson") -> CircuitSpec:
    """Thermal / squeezed-thermal inputs, purifiers, then a passive network.

    ``method="williamson"`` follows sigma = S^{-T} N S^{-1} and the symplectic
    SVD S^{-T} = K Sigma L^T. When L^T N L is not again a diagonal thermal
    matrix (L mixes modes of different nu) the exact eigenmode construction
    is used instead: in the joint eigenbasis of (A11, A12) every mode is an
    independent squeezed thermal state, so the network is that basis with a
    quarter-wave phase on modes whose p quadrature is squeezed.
    """
    m = e.modes
    if method == "williamson":
        try:
            w = williamson(_quadrature(e.sigma))
            g = np.linalg.inv(w.s).T
            svd = symplectic_svd(g)
            tau = svd.l.T @ np.diag(np.repeat(w.nu, 2)) @ svd.l
            if _thermal_diagonal(tau):
                nu_in = np.diag(tau)[0::2]
                inputs = [InputState.make(float(v), float(x)) for v, x in zip(nu_in, svd.r)]
                t = unitary_from_passive(svd.k)
                return CircuitSpec(m, inputs, _purifiers(nu_in, m), t, clements_decompose(t), "williamson")
        except SymplecticError:
            pass
        method = "eigenbasis"
    if method != "eigenbasis":
        raise CircuitError(f"unknown synthesis method {method!r}")
    r = e.r
    phase = np.where(r < 0, 1j, 1.0)
    t = e.modes_basis.astype(complex) * phase
    inputs = [InputState.make(float(v), float(abs(x))) for v, x in zip(e.nu, r)]
    return CircuitSpec(m, inputs, _purifiers(e.nu, m), t, clements_decompose(t), "eigenbasis")


# ---------------------------------------------------------------------------
# Covariance propagation
# ---------------------------------------------------------------------------


def squeezer_symplectic(r: float) -> np.ndarray:
    return np.diag([math.exp(-r), math.exp(r)])


def tms_symplectic(xi: float) -> np.ndarray:
    """Interleaved (x_a, p_a, x_b, p_b) symplectic of exp(xi (a^dag b^dag - a b))."""
    ch, sh = math.cosh(xi), math.sinh(xi)
    return np.array(
        [[ch, 0, sh, 0], [0, ch, 0, -sh], [sh, 0, ch, 0], [0, -sh, 0, ch]],
        dtype=float,
    )


def _apply_local(sigma: np.ndarray, s: np.ndarray, modes: list[int]) -> np.ndarray:
    n = sigma.shape[0]
    full = np.eye(n)
    idx = [2 * k + q for k in modes for q in (0, 1)]
    full[np.ix_(idx, idx)] = s
    return full @ sigma @ full.T


def simulate_cov(spec: CircuitSpec, basis: Basis = Basis.HEISENBERG, use_mesh: bool = False,
                 keep_ancillas: bool = False) -> CovarianceMatrix:
    """Push vacuum through purifiers, squeezers and the network.

    Purified modes start as half of a two-mode squeezed vacuum; thermal
    inputs without a purifier are inserted directly. Ancillas are traced out
    unless ``keep_ancillas``.
    """
    m, total = spec.system_modes, spec.modes
    sigma = np.eye(2 * total) / 2
    purified = {p.target for p in spec.purifiers}
    for p in spec.purifiers:
        sigma = _apply_local(sigma, tms_symplectic(p.xi), [p.target, p.ancilla])
    for k, s in enumerate(spec.inputs):
        if s.kind in ("thermal", "squeezed_thermal") and k not in purified:
            sigma[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = s.nu * np.eye(2)
        if s.r:
            sigma = _apply_local(sigma, squeezer_symplectic(s.r), [k])
    t = recompose(spec.mesh, m) if use_mesh else spec.interferometer
    passive = np.eye(2 * total)
    passive[: 2 * m, : 2 * m] = passive_symplectic(t)
    sigma = passive @ sigma @ passive.T
    if not keep_ancillas:
        sigma = sigma[: 2 * m, : 2 * m]
    cov = CovarianceMatrix((sigma + sigma.T) / 2, Basis.QUADRATURE)
    return basis_convert(cov, basis)


def covariance_error(spec: CircuitSpec, target: CovarianceMatrix, use_mesh: bool = False) -> float:
    """Relative Frobenius error of the simulated covariance against ``target``."""
    got = simulate_cov(spec, target.basis, use_mesh=use_mesh).entries
    return float(np.linalg.norm(got - target.entries) / np.linalg.norm(target.entries))
