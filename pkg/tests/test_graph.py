import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbsmatch import graph as gr
from gbsmatch import hafnian as hf
from gbsmatch import probability as pb
import oracles


def test_edge_list_builds_k4():
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    g = gr.from_edge_list(4, edges)
    assert np.array_equal(g.matrix, oracles.k4())
    assert g.is_plain


def test_edge_list_trivial_cases():
    assert np.array_equal(gr.from_edge_list(2, []).matrix, np.zeros((2, 2)))
    assert np.array_equal(gr.from_edge_list(2, [(0, 1)]).matrix, [[0, 1], [1, 0]])


@pytest.mark.parametrize("edges", [[(0, 4)], [(-1, 2)], [(1, 1)]])
def test_edge_list_errors(edges):
    with pytest.raises(gr.GraphError):
        gr.from_edge_list(4, edges)


def test_complete_graphs():
    assert np.array_equal(gr.complete_graph(4).matrix, oracles.k4())
    assert np.array_equal(gr.complete_graph(2).matrix, [[0, 1], [1, 0]])
    assert not gr.complete_graph(5).matchable
    with pytest.raises(gr.GraphError):
        gr.complete_graph(0)


def test_k20_spectrum_dense():
    s = gr.spectrum(gr.complete_graph(20))
    ref = np.sort(np.linalg.eigvalsh(oracles.complete(20)))[::-1]
    assert np.allclose(s.eigenvalues, ref, atol=1e-10)
    assert s.eigenvalues[0] == pytest.approx(19)
    assert np.allclose(s.eigenvalues[1:], -1)


@pytest.mark.parametrize("m", range(1, 9))
def test_complete_spectrum_closed_form(m):
    w = gr.spectrum(gr.complete_graph(2 * m)).eigenvalues
    ref = np.array([2 * m - 1.0] + [-1.0] * (2 * m - 1))
    assert np.max(np.abs(w - ref)) < 1e-10


def test_one_edge_removed():
    g = gr.one_edge_removed(4)
    ref = oracles.k4()
    ref[0, 1] = ref[1, 0] = 0
    assert np.array_equal(g.matrix, ref)
    assert hf.haf_bruteforce(g.matrix).exact == 2
    # R6 has 15 - 3 = 12 perfect matchings
    assert hf.haf_bruteforce(gr.one_edge_removed(6).matrix).exact == 12
    assert oracles.haf_laplace(gr.one_edge_removed(6).matrix) == 12
    with pytest.raises(gr.GraphError):
        gr.one_edge_removed(3)


def test_direct_sum():
    k4 = gr.complete_graph(4)
    s = gr.direct_sum(k4, k4)
    assert s.n_vertices == 8
    assert np.array_equal(s.matrix[:4, :4], oracles.k4()) and np.array_equal(s.matrix[4:, 4:], oracles.k4())
    assert not s.matrix[:4, 4:].any()
    empty = gr.from_edge_list(0, [])
    assert gr.direct_sum(k4, empty) == k4
    k2 = gr.complete_graph(2)
    assert hf.haf_bruteforce(gr.direct_sum(k2, k2).matrix).exact == 1


def test_diagonal_shift_examples():
    g = gr.diagonal_shift(gr.complete_graph(4), -2 / 3)
    assert np.allclose(gr.spectrum(g).eigenvalues, [7 / 3, -5 / 3, -5 / 3, -5 / 3], atol=1e-12)
    assert gr.diagonal_shift(gr.complete_graph(4), 0) == gr.complete_graph(4)
    k20 = gr.diagonal_shift(gr.complete_graph(20), -6)
    assert np.array_equal(k20.matrix, oracles.complete(20) - 6 * np.eye(20))
    per_vertex = gr.diagonal_shift(gr.complete_graph(4), [1, 2, 1, 2])
    assert np.array_equal(np.diag(per_vertex.matrix), [1, 2, 1, 2])


def test_inflate():
    k2 = gr.complete_graph(2)
    assert gr.inflate(k2, 1) == k2
    assert np.array_equal(gr.inflate(k2, 2).matrix, np.kron([[0, 1], [1, 0]], np.ones((2, 2))))
    with pytest.raises(gr.GraphError):
        gr.inflate(k2, 0)


@pytest.mark.parametrize("n_vertices", [2, 4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_inflation_scales_spectrum(n_vertices, n):
    g = gr.complete_graph(n_vertices)
    w = gr.spectrum(gr.inflate(g, n)).eigenvalues
    nonzero = w[np.abs(w) > 1e-9]
    ref = n * gr.spectrum(g).eigenvalues
    assert np.allclose(np.sort(nonzero), np.sort(ref[np.abs(ref) > 1e-9]), atol=1e-10)


def test_inflated_one_edge_removed_block_layout():
    m, n = 3, 2
    r = gr.one_edge_removed(2 * m).matrix
    infl = gr.inflate(gr.from_matrix(r), n).matrix
    k, ell = 2 * n, n * (2 * m - 2)
    assert np.array_equal(infl[:k, :k], np.zeros((k, k)))
    assert np.array_equal(infl[:k, k:], np.ones((k, ell)))
    # the lower block is an inflated complete graph: ones off the n x n diagonal blocks
    assert np.array_equal(infl[k:, k:], np.kron(oracles.complete(2 * m - 2), np.ones((n, n))))


def test_extend_complete():
    assert gr.extend_complete(2, 1) == gr.complete_graph(4)
    assert gr.extend_complete(10, 16).n_vertices == 320
    big = gr.extend_complete(2500, 64)
    assert big.n_vertices == 320000 and big.adjacency is None
    with pytest.raises(gr.GraphError):
        big.matrix
    s = gr.spectrum(gr.diagonal_shift(big, -100.0))
    assert len(s) == 320000
    assert s.eigenvalues[0] == pytest.approx(320000 - 1 - 100)
    assert s.max_abs == pytest.approx(320000 - 101)


def test_row_col_scale():
    g = gr.row_col_scale(gr.complete_graph(2), 0, 2)
    assert np.array_equal(g.matrix, [[0, 2], [2, 0]])
    assert hf.haf_bruteforce(g.matrix).exact == 2
    assert gr.row_col_scale(gr.complete_graph(4), 1, 1) == gr.complete_graph(4)
    assert hf.haf_bruteforce(gr.row_col_scale(gr.complete_graph(4), 0, 3).matrix).exact == 9
    with pytest.raises(gr.GraphError):
        gr.row_col_scale(gr.complete_graph(4), 4, 2)


def test_row_col_scale_diagonal_once():
    g = gr.row_col_scale(gr.diagonal_shift(gr.complete_graph(2), 1.0), 0, 3)
    assert g.matrix[0, 0] == 3.0


def test_spectrum_examples():
    assert np.allclose(gr.spectrum(gr.complete_graph(4)).eigenvalues, [3, -1, -1, -1], atol=1e-12)
    z = gr.spectrum(gr.from_edge_list(4, []))
    assert np.array_equal(z.eigenvalues, np.zeros(4)) and z.max_abs == 0


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("n", range(1, 5))
def test_extended_shifted_spectrum(m, n):
    d = 0.37 * m * n
    g = gr.diagonal_shift(gr.extend_complete(m, n), -d)
    dense = np.linalg.eigvalsh(gr.complete_graph(2 * n * m).matrix - d * np.eye(2 * n * m))
    w = gr.spectrum(g).eigenvalues
    assert np.max(np.abs(w - np.sort(dense)[::-1])) < 1e-10
    # the doubled values are +-(eigenvalues) as in spec_kext with c = 1
    assert np.allclose(np.sort(np.abs(pb.spec_kext(m, n, 1.0, d))), np.sort(np.abs(np.concatenate([w, w]))), atol=1e-10)


def test_spectrum_family_vs_dense():
    for g in (gr.complete_graph(600), gr.one_edge_removed(600)):
        w = gr.spectrum(gr.diagonal_shift(g, 0.5)).eigenvalues
        dense = np.sort(np.linalg.eigvalsh(g.matrix + 0.5 * np.eye(600)))[::-1]
        assert np.max(np.abs(w - dense)) < 1e-9


def test_parse_edge_list_and_json(tmp_path):
    text = "# K4 minus an edge\n4\n0 2\n0 3\n1 2\n1 3\n2 3\n"
    g = gr.parse_edge_list(text)
    assert np.array_equal(g.matrix, gr.one_edge_removed(4).matrix)
    doc = gr.graph_to_json(g)
    assert gr.parse_json_graph(json.dumps(doc)) == g
    shifted = gr.diagonal_shift(g, -0.5)
    assert gr.parse_json_graph(gr.graph_to_json(shifted)) == shifted
    p = tmp_path / "r4.json"
    p.write_text(json.dumps(doc))
    assert gr.load_graph(p) == g
    p2 = tmp_path / "r4.txt"
    p2.write_text(text)
    assert gr.load_graph(p2) == g


@pytest.mark.parametrize("text", ["", "x\n0 1", "3\n0 1 2", "3\n0 3"])
def test_parse_errors(text):
    with pytest.raises(gr.GraphError):
        gr.parse_edge_list(text)


@pytest.mark.parametrize("doc", ["{", "[]", '{"edges": []}', '{"n": 2, "diag": [1]}'])
def test_json_errors(doc):
    with pytest.raises(gr.GraphError):
        gr.parse_json_graph(doc)


def test_asymmetric_rejected():
    with pytest.raises(gr.GraphError):
        gr.from_matrix([[0, 1], [0, 0]])


sym = st.integers(1, 4).flatmap(
    lambda m: st.lists(st.integers(-3, 3), min_size=(2 * m) ** 2, max_size=(2 * m) ** 2).map(
        lambda v: np.array(v).reshape(2 * m, 2 * m) + np.array(v).reshape(2 * m, 2 * m).T
    )
)


@given(sym, st.floats(-5, 5), st.integers(1, 3), st.integers(-3, 3))
@settings(max_examples=50, deadline=None)
def test_transforms_preserve_symmetry_and_shift_keeps_hafnian(a, d, n, factor):
    g = gr.from_matrix(a)
    outs = [gr.diagonal_shift(g, d), gr.inflate(g, n), gr.row_col_scale(g, 0, factor), gr.direct_sum(g, g)]
    for o in outs:
        assert np.array_equal(o.matrix, o.matrix.T)
    assert hf.haf_bruteforce(outs[0].matrix).approx == hf.haf_bruteforce(a).approx


@given(sym)
@settings(max_examples=30, deadline=None)
def test_spectrum_sorted_and_complete(a):
    s = gr.spectrum(gr.from_matrix(a))
    assert len(s) == a.shape[0]
    assert np.all(np.diff(s.eigenvalues) <= 1e-12)
    assert s.max_abs == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(a))), abs=1e-10)
