import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbsmatch import encoder as en
from gbsmatch import graph as gr
from gbsmatch import symplectic as sp
from gbsmatch.symplectic import Basis
import oracles



def test_k4_conditions():
    rep = en.check_mixed_conditions(oracles.k4())
    assert rep.encodable and rep.failed == []
    assert rep.c_upper == pytest.approx(1 / 3, rel=1e-12)
    shifted = en.check_mixed_conditions(oracles.k4() - 2 / 3 * np.eye(4))
    assert shifted.c_upper == pytest.approx(3 / 7, rel=1e-12)


def test_block_diagonal_double_has_zero_a12():
    a = np.kron(np.eye(2), oracles.k4())
    rep = en.check_mixed_conditions(a)
    assert rep.a12_psd and rep.encodable


def test_failed_conditions_are_named():
    r4 = gr.one_edge_removed(4).matrix
    rep = en.check_mixed_conditions(r4)
    assert not rep.block_symmetric and "block_symmetric" in rep.failed
    a = np.block([[np.zeros((2, 2)), -np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    rep = en.check_mixed_conditions(a)
    assert rep.failed == ["a12_psd"]
    a11 = np.array([[0.0, 1.0], [1.0, 0.0]])
    a12 = np.diag([1.0, 0.0])
    rep = en.check_mixed_conditions(np.block([[a11, a12], [a12, a11]]))
    assert not rep.commuting
    with pytest.raises(en.EncodingError) as exc:
        en.encode_mixed(r4, 0.1)
    assert exc.value.condition == "block_symmetric"


@pytest.mark.parametrize("c", [0.05, 0.1, 0.2, 0.3])
def test_sigma_from_matrix_k4(c):
    sig = en.sigma_from_matrix(c * oracles.k4())
    assert np.max(np.abs(sig.entries - oracles.sigma_heisenberg(c * oracles.k4()))) < 1e-12
    assert sp.is_valid_covariance(sig).valid


@pytest.mark.parametrize("c", [0.05, 0.1, 0.2, 0.3])
def test_sigma_for_doubled_k4(c):
    sig = en.sigma_from_matrix(c * np.kron(np.eye(2), oracles.k4()))
    assert np.max(np.abs(sig.entries - oracles.cm_example(c))) < 1e-12


def test_zero_matrix_is_vacuum():
    assert np.allclose(en.sigma_from_matrix(np.zeros((4, 4))).entries, np.eye(4) / 2)
    assert np.allclose(en.matrix_from_sigma(np.eye(4) / 2), 0)


def test_singular_boundary_rejected():
    with pytest.raises(en.EncodingError) as exc:
        en.sigma_from_matrix(oracles.k4() / 3)
    assert exc.value.condition == "c_range"
    with pytest.raises(en.EncodingError):
        en.sigma_from_matrix(np.zeros((3, 3)))


def test_matrix_from_sigma_roundtrips():
    a = 0.2 * oracles.k4()
    assert np.max(np.abs(en.matrix_from_sigma(en.sigma_from_matrix(a)) - a)) < 1e-12
    b = 0.1 * np.kron(np.eye(2), oracles.k4())
    assert np.max(np.abs(en.matrix_from_sigma(oracles.cm_example(0.1)) - b)) < 1e-12


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_roundtrip_random(seed, m, frac):
    a = oracles.random_symmetric(2 * m, np.random.default_rng(seed))
    a = frac * a * en.c_upper_of(a)
    assert np.max(np.abs(en.matrix_from_sigma(en.sigma_from_matrix(a)) - a)) < 1e-10 * max(1, 1 / (1 - frac))


def test_positive_definiteness_boundary():
    # Theorem-1 style check on random block-symmetric matrices
    rng = np.random.default_rng(21)
    for _ in range(100):
        m = int(rng.integers(2, 5))
        a = oracles.random_encodable(m, rng)
        lam = np.max(np.abs(np.linalg.eigvals(sp.xmat(m) @ a)))
        inside = en.sigma_from_matrix(0.99 / lam * a)
        assert sp.is_valid_covariance(inside).positive_definite
        outside = np.linalg.inv(np.eye(2 * m) - sp.xmat(m) @ (1.05 / lam * a)) - np.eye(2 * m) / 2
        assert not sp.is_valid_covariance(sp.CovarianceMatrix(outside)).positive_definite


@pytest.mark.parametrize("c", [0.05, 0.1, 0.2, 0.3])
def test_encode_mixed_k4(c):
    e = en.encode_mixed(gr.complete_graph(4), c)
    assert np.allclose(e.nu, [oracles.k4_mixed_nu(c), 0.5], atol=1e-10)
    assert np.allclose(e.f, [1, -1]) and np.allclose(e.h, [2, 0])
    assert e.n_thermal == 1 and e.modes == 2
    assert np.allclose(2 * e.nu, np.cosh(2 * e.xi))
    r1 = math.log(math.sqrt((1 + c) / (1 - c)))
    r2 = math.log(((1 + c) * (1 - 3 * c) / ((1 - c) * (1 + 3 * c))) ** 0.25)
    assert np.allclose(sorted(np.abs(e.r)), sorted([abs(r1), abs(r2)]), atol=1e-12)
    assert sp.is_valid_covariance(e.sigma).valid
    doc = e.as_dict()
    assert doc["mode"] == "mixed" and doc["n_thermal"] == 1


def test_encode_mixed_k2_is_thermal():
    # K2 puts its only edge in A12, so the single mode is unsqueezed and thermal
    c = 0.5
    e = en.encode_mixed(gr.complete_graph(2), c)
    assert e.modes == 1
    assert np.allclose(e.h, 1) and np.allclose(e.f, 0)
    assert e.nu[0] == pytest.approx(0.5 * (1 + c) / (1 - c), abs=1e-12) and e.n_thermal == 1
    assert e.r[0] == 0.0


def test_encode_mixed_zero_a12_is_pure():
    a = np.block([[np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros((2, 2))], [np.zeros((2, 2)), np.array([[0.0, 1.0], [1.0, 0.0]])]])
    e = en.encode_mixed(a, 0.5)
    assert np.allclose(e.nu, 0.5) and e.n_thermal == 0
    assert np.allclose(sorted(np.abs(e.r)), 0.25 * math.log(1.5**2 / 0.5**2))


def test_encode_mixed_k20():
    e = en.encode_mixed(gr.complete_graph(20), 0.04)
    assert sp.is_valid_covariance(e.sigma).valid
    assert e.n_thermal == 1
    f, h = en.joint_spectra(gr.complete_graph(20))
    assert np.allclose(np.sort(f), np.sort(e.f)) and np.allclose(np.sort(h), np.sort(e.h))


def test_joint_spectra_analytic_large():
    f, h = en.joint_spectra(gr.complete_graph(20000))
    assert f[0] == 9999 and h[0] == 10000 and len(f) == 10000
    assert np.all(f[1:] == -1) and np.all(h[1:] == 0)
    f2, _ = en.joint_spectra(gr.diagonal_shift(gr.complete_graph(20000), -6))
    assert f2[0] == 9993


def test_mixed_spectrum_pattern():
    rng = np.random.default_rng(22)
    for _ in range(20):
        m = int(rng.integers(1, 5))
        a = oracles.random_encodable(m, rng)
        c = 0.9 * en.c_upper_of(a)
        e = en.encode_mixed(a, c)
        ref = np.concatenate(
            [0.5 * (1 + c * (e.h + e.f)) / (1 - c * (e.h + e.f)), 0.5 * (1 + c * (e.h - e.f)) / (1 - c * (e.h - e.f))]
        )
        assert np.allclose(np.sort(np.linalg.eigvalsh(e.sigma.entries)), np.sort(ref), atol=1e-10)
        # the closed-form nu agree with the generic symplectic eigenvalues
        assert np.allclose(np.sort(e.nu), np.sort(sp.symplectic_eigenvalues(e.sigma)), atol=1e-10)


def test_mixed_squeezing_agrees_with_williamson_route():
    from gbsmatch import circuit as ci

    rng = np.random.default_rng(23)
    for _ in range(10):
        m = int(rng.integers(1, 4))
        a = oracles.random_encodable(m, rng)
        e = en.encode_mixed(a, 0.6 * en.c_upper_of(a))
        spec = ci.synthesize_mixed(e, "williamson")
        got = sorted(abs(s.r) for s in spec.inputs)
        assert np.allclose(got, sorted(np.abs(e.r)), atol=1e-8)


def test_c_range_checks():
    with pytest.raises(en.EncodingError) as exc:
        en.encode_mixed(oracles.k4(), 1 / 3)
    assert exc.value.condition == "c_range"
    with pytest.raises(en.EncodingError):
        en.encode_mixed(oracles.k4(), -0.1)
    with pytest.raises(en.EncodingError):
        en.encode_pure_doubled(oracles.k4(), 0.34)
    with pytest.raises(ValueError):
        en.encode(oracles.k4(), 0.1, mode="bogus")


@pytest.mark.parametrize("c", [0.05, 0.1, 0.2, 0.3])
def test_encode_pure_doubled_k4(c):
    e = en.encode_pure_doubled(gr.complete_graph(4), c)
    assert e.modes == 4
    assert np.max(np.abs(e.sigma.entries - oracles.cm_example(c))) < 1e-12
    assert np.max(np.abs(e.nu - 0.5)) < 1e-9
    assert np.allclose(e.lam, [3, -1, -1, -1])
    assert e.r[0] == pytest.approx(0.5 * math.log((1 + 3 * c) / (1 - 3 * c)))
    assert np.allclose(e.r[1:], 0.5 * math.log((1 + c) / (1 - c)))
    assert e.as_dict()["mode"] == "pure"


def test_encode_pure_shifted_k4():
    g = gr.diagonal_shift(gr.complete_graph(4), -2 / 3)
    e = en.encode_pure_doubled(g, 0.42)
    assert np.max(np.abs(e.nu - 0.5)) < 1e-9
    with pytest.raises(en.EncodingError):
        en.encode_pure_doubled(g, 3 / 7)


def test_encode_pure_small_c_is_nearly_vacuum():
    e = en.encode_pure_doubled(gr.complete_graph(4), 1e-12)
    assert np.allclose(e.r, 0, atol=1e-11)
    assert np.allclose(e.sigma.entries, np.eye(8) / 2, atol=1e-11)


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0.05, 0.99))
@settings(max_examples=40, deadline=None)
def test_pure_doubled_always_pure(seed, n, frac):
    a = oracles.random_symmetric(n, np.random.default_rng(seed))
    c = frac / np.max(np.abs(np.linalg.eigvalsh(a)))
    e = en.encode_pure_doubled(a, c)
    assert np.max(np.abs(e.nu - 0.5)) < 1e-9


def test_auto_mode():
    assert isinstance(en.encode(oracles.k4(), 0.1), en.MixedEncoding)
    assert isinstance(en.encode(gr.one_edge_removed(4).matrix, 0.1), en.PureEncoding)
    assert isinstance(en.encode(oracles.complete(3), 0.1), en.PureEncoding)


def test_simultaneous_eigh_degenerate_fallback():
    # A11 = A12 = 0 except one shared direction: every t gives a degenerate sum
    a11 = np.diag([1.0, 1.0, 0.0])
    a12 = np.diag([0.0, 0.0, 1.0])
    rot = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))[0]
    f, h, v = en.simultaneous_eigh(rot @ a11 @ rot.T, rot @ a12 @ rot.T)
    assert np.allclose(v.T @ (rot @ a11 @ rot.T) @ v, np.diag(f), atol=1e-10)
    assert np.allclose(v.T @ (rot @ a12 @ rot.T) @ v, np.diag(h), atol=1e-10)
    assert h[0] == pytest.approx(1.0)
