import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import random_density, random_hermitian, rng
from noisyqsl import linalg as la

seeds = st.integers(0, 2**32 - 1)


def test_eig_examples():
    w, v = la.eig_hermitian(np.eye(2))
    assert np.allclose(w, [1, 1]) and np.allclose(np.abs(v), np.eye(2))
    assert np.allclose(la.eig_hermitian(np.diag([3.0, -1.0]))[0], [-1, 3])
    assert np.allclose(la.eig_hermitian([[0, 1], [1, 0]])[0], [-1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        la.eig_hermitian([[0, 1], [0, 0]])


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 64))
def test_eig_reconstruction(seed, n):
    a = random_hermitian(n, rng(seed))
    w, v = la.eig_hermitian(a)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - a)) <= 1e-10 * max(1.0, la.operator_norm(a))


def test_svd_examples():
    assert np.allclose(la.singular_values(np.zeros((3, 3))), 0)
    assert np.allclose(la.singular_values(np.diag([1.0, -2.0])), [2, 1])
    assert np.allclose(la.singular_values([[0, 1], [0, 0]]), [1, 0])


@settings(max_examples=30, deadline=None)
@given(seed=seeds, m=st.integers(1, 8), n=st.integers(1, 8))
def test_svd_adjoint_and_reconstruction(seed, m, n):
    r = rng(seed)
    a = r.standard_normal((m, n)) + 1j * r.standard_normal((m, n))
    u, s, v = la.svd(a)
    assert np.allclose(u @ np.diag(s) @ v.conj().T, a, atol=1e-12)
    assert np.allclose(s, la.singular_values(a.conj().T), atol=1e-12)


def test_norm_examples():
    assert la.operator_norm(np.eye(4)) == pytest.approx(1)
    assert la.trace_norm(np.eye(4)) == pytest.approx(4)
    assert la.operator_norm(np.diag([1.0, -2.0])) == pytest.approx(2)
    assert la.trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_trace_norm_unitary_invariance(seed, n):
    r = rng(seed)
    m = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    u, v = la.random_unitary(n, r), la.random_unitary(n, r)
    assert abs(la.trace_norm(u @ m @ v) - la.trace_norm(m)) <= 1e-10 * max(1, la.trace_norm(m))


def test_trace_norm_matches_sdp():
    """max Re Tr(M^H W) over ||W|| <= 1, and its dual (Tr P + Tr Q)/2, equal ||M||_1."""
    from noisyqsl.sdp import ConicProblem, DenseBlock, solve_conic
    r = rng(3)
    n = 3
    m = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    A, b = [], []
    for i in range(n):
        for j in range(n):
            e = np.zeros((2 * n, 2 * n), complex)
            e[n + i, j] = 1
            A.append(-(e + e.T))
            A.append(-1j * (e - e.T))
            b += [m[i, j].real, m[i, j].imag]
    blk = DenseBlock(C=np.eye(2 * n, dtype=complex), A=np.array(A), index=np.arange(len(b)))
    res = solve_conic(ConicProblem(b=np.array(b), blocks=[blk]), tol=1e-11)
    assert res.converged
    assert res.y_objective == pytest.approx(la.trace_norm(m), abs=1e-8)
    assert res.x_objective == pytest.approx(la.trace_norm(m), abs=1e-8)


def test_matrix_sqrt_examples():
    assert np.allclose(la.matrix_sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(la.matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2, 3]))
    plus = np.full((2, 2), 0.5)
    assert np.allclose(la.matrix_sqrt_psd(plus), plus)


def test_matrix_sqrt_clips_small_negatives_and_rejects_large():
    s = la.matrix_sqrt_psd(np.diag([1.0, -1e-12]))
    assert np.allclose(s, np.diag([1, 0]))
    with pytest.raises(ValueError):
        la.matrix_sqrt_psd(np.diag([1.0, -1e-3]))


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_matrix_sqrt_squares_back(seed, n):
    rho = random_density(n, rng(seed))
    s = la.matrix_sqrt_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-12)


def test_expm_hermitian():
    sx = np.array([[0, 1], [1, 0]], complex)
    assert np.allclose(la.expm_hermitian(sx / 2, np.pi), -1j * sx)
    assert np.allclose(la.expm_hermitian(np.diag([0.5, -0.5]), np.pi), np.diag([-1j, 1j]))


def test_kron_and_partial_trace_examples():
    assert np.allclose(la.kron(np.eye(2), np.eye(2)), np.eye(4))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    proj = np.outer(bell, bell)
    for keep in ([0], [1]):
        assert np.allclose(la.partial_trace(proj, [2, 2], keep), np.eye(2) / 2)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, da=st.integers(1, 4), db=st.integers(1, 4))
def test_partial_trace_of_product(seed, da, db):
    r = rng(seed)
    a, b = random_density(da, r), 2.5 * random_density(db, r)
    ab = la.kron(a, b)
    assert np.allclose(la.partial_trace(ab, [da, db], [0]), a * np.trace(b), atol=1e-12)
    assert np.allclose(la.partial_trace(ab, [da, db], [1]), b * np.trace(a), atol=1e-12)
    full = la.partial_trace(ab, [da, db], [])
    assert full.shape == (1, 1) and np.isclose(full[0, 0], np.trace(ab))


def test_partial_trace_three_parties_order():
    r = rng(1)
    a, b, c = (random_density(d, r) for d in (2, 3, 2))
    abc = la.kron(a, b, c)
    assert np.allclose(la.partial_trace(abc, [2, 3, 2], [0, 2]), la.kron(a, c))


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        la.partial_trace(np.eye(4), [2, 3], [0])
