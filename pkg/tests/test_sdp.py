import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import corpus, rng
from noisyqsl import channels as ch
from noisyqsl import sdp
from noisyqsl.linalg import operator_norm, trace_norm

TOL = sdp.DEFAULT_TOL


def pair(c):
    return ch.pad_kraus(ch.identity_channel(c.dim), c.num_kraus).kraus, c.kraus


def test_kw_examples():
    deph = ch.dephasing(0.1, 1.0, math.pi / 2)
    f1, f2 = pair(deph)
    assert np.allclose(sdp.build_kw(f1, f2, np.zeros((2, 2))), 0)
    one = np.eye(2)[None]
    assert sdp.kw_objective(one, one, np.array([[1.0]])) == pytest.approx(1)
    from noisyqsl.qsl import dephasing_optimal_w
    W = dephasing_optimal_w(math.exp(-0.1 * math.pi / 2), 1.0, math.pi / 2)
    assert operator_norm(W) == pytest.approx(1)
    assert sdp.kw_objective(f1, f2, W) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_identity_vs_identity():
    one = np.eye(2, dtype=complex)[None]
    sol = sdp.solve_primal(one, one)
    assert sol.primal_value == pytest.approx(1, abs=1e-9)
    assert sol.dual_value == pytest.approx(1, abs=1e-9)
    assert sol.W_opt.shape == (1, 1) and sol.W_opt[0, 0] == pytest.approx(1, abs=1e-8)


def test_amplitude_damping_values():
    sol = sdp.solve_dual(*pair(ch.amplitude_damping(1.0, math.log(4))))
    assert sol.primal_value == pytest.approx(0.5, abs=1e-9)
    assert sol.dual_value == pytest.approx(0.5, abs=1e-9)


def test_dephasing_value_and_plus_state():
    c = ch.dephasing(0.1, 1.0, math.pi)
    sol = sdp.solve_primal(*pair(c))
    assert sol.primal_value == pytest.approx(0.3671494, abs=1e-6)
    plus = np.full((2, 2), 0.5)
    for t in (0.3, 1.0, 2.5, 7.0):
        p = math.exp(-0.1 * t)
        exact = math.sqrt((1 + p * math.cos(t)) / 2)
        k1, k2 = pair(ch.dephasing(0.1, 1.0, t))
        assert sdp.dual_trace_norm_value(k1, k2, plus) == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("name,c", corpus(), ids=[n for n, _ in corpus()])
def test_solution_invariants(name, c):
    k1, k2 = pair(c)
    sol = sdp.solve_channel_sdp(k1, k2)
    assert sol.converged and sol.gap <= 1e-8 and sol.max_residual <= 1e-8
    assert sdp.contraction_ok(sol.W_opt)
    assert abs(sdp.kw_objective(k1, k2, sol.W_opt) - sol.primal_value) <= 10 * TOL
    w = np.linalg.eigvalsh(sol.rho_opt)
    assert w[0] >= -1e-9 and abs(np.trace(sol.rho_opt).real - 1) <= 1e-9
    assert abs(sdp.dual_trace_norm_value(k1, k2, sol.rho_opt) - sol.dual_value) <= 10 * TOL
    # x - y = <X, Z> + O(equality residuals); exact weak duality needs exact feasibility
    for xobj, yobj, pinf, dinf in sol.history:
        assert xobj >= yobj - 1e-12 - 100 * (pinf + dinf)
        if max(pinf, dinf) <= 1e-13:
            assert xobj >= yobj - 1e-12


def test_solver_is_deterministic():
    k1, k2 = pair(corpus()[5][1])
    a, b = sdp.solve_channel_sdp(k1, k2), sdp.solve_channel_sdp(k1, k2)
    assert a.primal_value == b.primal_value
    assert np.array_equal(a.W_opt, b.W_opt) and np.array_equal(a.rho_opt, b.rho_opt)


@pytest.mark.parametrize("idx", [0, 1, 4, 7, 22])
def test_real_and_complex_paths_agree(idx):
    k1, k2 = pair(corpus()[idx][1])
    c = sdp.solve_channel_sdp(k1, k2)
    r = sdp.solve_channel_sdp(k1, k2, real=True)
    assert r.converged and abs(r.primal_value - c.primal_value) <= 1e-9
    assert r.max_residual <= 1e-8


def test_unequal_channels_general():
    r = rng(11)
    a, b = ch.random_channel(3, 2, r), ch.random_channel(3, 2, r)
    sol = sdp.solve_channel_sdp(a.kraus, b.kraus)
    assert sol.converged and sol.gap <= 1e-8
    assert sdp.kw_objective(a.kraus, b.kraus, sol.W_opt) == pytest.approx(sol.primal_value, abs=1e-9)


def test_row_problem_is_rectangular():
    sol = sdp.row_problem_value(ch.amplitude_damping(1.0, math.log(4)).kraus)
    assert sol.W_opt.shape == (1, 2)
    assert sol.primal_value == pytest.approx(0.5, abs=1e-7)


def test_realify_examples():
    a = np.array([[1.0, 2.0], [2.0, -3.0]])
    r = sdp.realify(a)
    assert np.allclose(r, np.block([[a, 0 * a], [0 * a, a]]))
    y = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(np.linalg.eigvalsh(sdp.realify(y)), [-1, -1, 1, 1])
    assert np.allclose(sdp.realify(np.zeros((3, 3))), 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_realify_round_trip_and_spectrum(seed, n):
    r = rng(seed)
    a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    h = a + a.conj().T
    assert np.allclose(sdp.unrealify(sdp.realify(h)), h)
    w = np.linalg.eigvalsh(h)
    assert np.allclose(np.linalg.eigvalsh(sdp.realify(h)), np.sort(np.repeat(w, 2)), atol=1e-10)


def test_m_matrix_trace_norm_is_dual_inner_min():
    r = rng(12)
    c = ch.random_channel(2, 3, r)
    k1, k2 = pair(c)
    rho = np.eye(2) / 2
    m = sdp.m_matrix(k1, k2, rho)
    assert sdp.dual_trace_norm_value(k1, k2, rho) == pytest.approx(trace_norm(m))
