"""Adjacency matrices, their hafnian-preserving transforms and spectra.

Graphs are immutable; every transform returns a new :class:`Graph`. Large
members of the complete / one-edge-removed families are kept as analytic
descriptors so that their spectra are available without materializing the
matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Family graphs above this size are never materialized.
MATERIALIZE_LIMIT = 10_000

FAMILIES = ("complete", "one_edge_removed")


class GraphError(ValueError):
    """Malformed graph input (bad index, self-loop, wrong size)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Real symmetric matrix with a vertex count and a label.

    ``adjacency`` is ``None`` only for family graphs too large to store; such
    graphs carry ``family`` and ``shift`` so the spectrum stays analytic.
    """

    n_vertices: int
    adjacency: np.ndarray | None = field(repr=False, compare=False)
    label: str = ""
    family: str | None = None
    shift: float = 0.0

    def __post_init__(self):
        if self.adjacency is not None:
            a = _frozen(self.adjacency)
            if a.shape != (self.n_vertices, self.n_vertices):
                raise GraphError(f"adjacency shape {a.shape} does not match n={self.n_vertices}")
            if not np.array_equal(a, a.T):
                raise GraphError("adjacency must be symmetric")
            object.__setattr__(self, "adjacency", a)
        elif self.family is None:
            raise GraphError("a graph needs either an adjacency matrix or a family descriptor")

    @property
    def matrix(self) -> np.ndarray:
        if self.adjacency is None:
            raise GraphError(
                f"{self.label or self.family} has {self.n_vertices} vertices; "
                "it is only available analytically"
            )
        return self.adjacency

    @property
    def is_plain(self) -> bool:
        """True for 0/1 matrices with zero diagonal."""
        a = self.matrix
        return bool(np.all(np.diag(a) == 0) and np.all((a == 0) | (a == 1)))

    @property
    def matchable(self) -> bool:
        return self.n_vertices % 2 == 0

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.adjacency is None or other.adjacency is None:
            return (self.n_vertices, self.family, self.shift) == (
                other.n_vertices, other.family, other.shift)
        return np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    max_abs: float

    def __len__(self):
        return len(self.eigenvalues)


def _sorted_desc(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return w[np.argsort(-w, kind="stable")]


def make_spectrum(w) -> Spectrum:
    w = _sorted_desc(w)
    return Spectrum(w, float(np.max(np.abs(w))) if len(w) else 0.0)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def from_matrix(a, label: str = "") -> Graph:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError("adjacency must be a square matrix")
    return Graph(a.shape[0], a, label)


def from_edge_list(n: int, edges: Iterable[Sequence[int]], label: str = "") -> Graph:
    if n < 0:
        raise GraphError("vertex count must be nonnegative")
    a = np.zeros((n, n))
    for e in edges:
        i, j = (int(v) for v in e)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        a[i, j] = a[j, i] = 1.0
    return Graph(n, a, label)


def complete_graph(n: int) -> Graph:
    """K_n. Odd n is allowed but the result is not ``matchable``."""
    if n < 1:
        raise GraphError("complete graph needs n >= 1")
    label = f"K{n}"
    if n > MATERIALIZE_LIMIT:
        return Graph(n, None, label, family="complete")
    return Graph(n, np.ones((n, n)) - np.eye(n), label, family="complete")


def one_edge_removed(n: int) -> Graph:
    """K_n without the edge (0, 1): block form [[0_2, J], [J, K_{n-2}]]."""
    if n < 4:
        raise GraphError("one-edge-removed graph needs n >= 4")
    label = f"R{n}"
    if n > MATERIALIZE_LIMIT:
        return Graph(n, None, label, family="one_edge_removed")
    a = np.ones((n, n)) - np.eye(n)
    a[0, 1] = a[1, 0] = 0.0
    return Graph(n, a, label, family="one_edge_removed")


def extend_complete(m: int, n: int) -> Graph:
    """The n-extension of K_{2m}, which is K_{2nm}."""
    if m < 1 or n < 1:
        raise GraphError("extension needs m, n >= 1")
    return complete_graph(2 * n * m)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def direct_sum(a: Graph, b: Graph) -> Graph:
    n = a.n_vertices + b.n_vertices
    out = np.zeros((n, n))
    out[: a.n_vertices, : a.n_vertices] = a.matrix
    out[a.n_vertices :, a.n_vertices :] = b.matrix
    label = f"{a.label}+{b.label}" if a.label or b.label else ""
    return Graph(n, out, label)


def diagonal_shift(a: Graph, d) -> Graph:
    """Return A + diag(d); ``d`` is a scalar or one value per vertex."""
    if a.adjacency is None:
        if not np.isscalar(d):
            raise GraphError("analytic family graphs only accept a scalar shift")
        return Graph(a.n_vertices, None, a.label, a.family, a.shift + float(d))
    dv = np.broadcast_to(np.asarray(d, dtype=float), (a.n_vertices,))
    fam = a.family if np.isscalar(d) else None
    shift = a.shift + float(d) if fam else 0.0
    return Graph(a.n_vertices, a.matrix + np.diag(dv), a.label, fam, shift)


def inflate(a: Graph, n: int) -> Graph:
    """n-inflation: each entry a_ij becomes the block a_ij * J_n."""
    if n < 1:
        raise GraphError("inflation factor must be >= 1")
    return Graph(a.n_vertices * n, np.kron(a.matrix, np.ones((n, n))), a.label)


def row_col_scale(a: Graph, k: int, n: float) -> Graph:
    """Multiply row k and column k by n; the diagonal entry is scaled once."""
    if not 0 <= k < a.n_vertices:
        raise GraphError(f"vertex index {k} out of range")
    b = np.array(a.matrix)
    akk = b[k, k]
    b[k, :] *= n
    b[:, k] *= n
    b[k, k] = n * akk
    return Graph(a.n_vertices, b, a.label)


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


def _family_eigenvalues(family: str, n: int, shift: float) -> np.ndarray:
    if family == "complete":
        return np.concatenate([[n - 1.0], np.full(n - 1, -1.0)]) + shift
    # one edge removed: W with k=2, l=n-2 and subtracted shift -shift
    from .probability import spec_w

    return spec_w(2, n - 2, -shift)


def spectrum(a: Graph) -> Spectrum:
    """Real eigenvalues sorted descending (ties keep eigensolver order)."""
    if a.adjacency is None or (a.family is not None and a.n_vertices > 512):
        return make_spectrum(_family_eigenvalues(a.family, a.n_vertices, a.shift))
    try:
        w = np.linalg.eigvalsh(a.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise GraphError(f"eigensolver did not converge: {exc}") from exc
    return make_spectrum(w)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def parse_edge_list(text: str, label: str = "") -> Graph:
    """Parse ``n`` on the first line, then one ``i j`` pair per line."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty edge list")
    try:
        n = int(lines[0])
        edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from exc
    if any(len(e) != 2 for e in edges):
        raise GraphError("every edge line needs exactly two vertex indices")
    return from_edge_list(n, edges, label)


def parse_json_graph(doc: dict | str, label: str = "") -> Graph:
    """Parse ``{"n": int, "edges": [[i, j], ...], "diag": [...]}``."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "n" not in doc:
        raise GraphError('graph document needs an "n" field')
    g = from_edge_list(int(doc["n"]), doc.get("edges", []), label)
    diag = doc.get("diag")
    if diag is not None:
        if len(diag) != g.n_vertices:
            raise GraphError("diag length must equal n")
        g = diagonal_shift(g, np.asarray(diag, dtype=float))
        g = Graph(g.n_vertices, g.adjacency, label)
    return g


def load_graph(path) -> Graph:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_json_graph(text, label=path.stem)
    return parse_edge_list(text, label=path.stem)


def graph_to_json(g: Graph) -> dict:
    a = g.matrix
    iu, ju = np.triu_indices(g.n_vertices, 1)
    off = a[iu, ju]
    if not np.all((off == 0) | (off == 1)):
        raise GraphError("only 0/1 off-diagonal matrices serialize to edge lists")
    doc = {"n": g.n_vertices, "edges": [[int(i), int(j)] for i, j, v in zip(iu, ju, off) if v]}
    if np.any(np.diag(a) != 0):
        doc["diag"] = [float(x) for x in np.diag(a)]
    return doc
