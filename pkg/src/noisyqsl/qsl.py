"""Maximal rotation angles of quantum dynamics and the resulting speed limits.

``d(K1, K2)`` is the largest Bures angle two channels can produce from a
common (possibly ancilla-assisted) input. For a dynamics ``K_t`` the angle
``d(I, K_t)`` bounds how far any state can be rotated by time ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize

from . import channels as ch
from .linalg import as_hermitian, as_matrix, dagger, eig_hermitian
from .sdp import DEFAULT_TOL, SdpSolution, kw_objective, row_problem_value, solve_channel_sdp
from .states import entanglement_entropy, fidelity_from_factors, purify

HALF_PI = 0.5 * math.pi
CERT_GAP = 1e-8
CERT_ANGLE = 1e-5


@dataclass
class QslResult:
    """A maximal-angle value with whatever certificate produced it."""

    cos_d: float
    method: str
    W_opt: Optional[np.ndarray] = None
    optimal_input: Optional[np.ndarray] = None
    ancilla_dim: int = 1
    gap: Optional[float] = None
    achieved_angle: Optional[float] = None
    certified: bool = True
    raw_angle: Optional[float] = None
    solution: Optional[SdpSolution] = field(default=None, repr=False)

    @property
    def d(self) -> float:
        return float(np.arccos(np.clip(self.cos_d, 0.0, 1.0)))


@dataclass
class BoundPair:
    lower: float
    upper: float
    N: int


def angle(cos_value: float) -> float:
    return float(np.arccos(np.clip(cos_value, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# unitary dynamics

def eigen_angles(U) -> np.ndarray:
    """Angles ``theta_j`` in ``(-pi, pi]`` with eigenvalues ``exp(-i theta_j)``."""
    u = as_matrix(U, "U")
    if u.shape[0] != u.shape[1] or np.max(np.abs(u @ dagger(u) - np.eye(len(u)))) > 1e-9:
        raise ValueError("U is not unitary")
    th = -np.angle(np.linalg.eigvals(u))
    return np.where(th <= -math.pi, th + 2 * math.pi, th)


def unitary_g_norm(U) -> float:
    """``min over global phases of max_j |theta_j|``.

    Equal to half of ``2 pi`` minus the widest gap between neighbouring
    eigen-angles on the circle.
    """
    th = np.sort(eigen_angles(U))
    gaps = np.diff(np.concatenate([th, [th[0] + 2 * math.pi]]))
    return float(0.5 * (2 * math.pi - np.max(gaps)))


def unitary_max_angle(U) -> float:
    return min(unitary_g_norm(U), HALF_PI)


def _spread(H):
    w, v = eig_hermitian(as_hermitian(H, "H"))
    return w, v, float(w[-1] - w[0])


def unitary_distance(H, t: float) -> QslResult:
    """``d(I, exp(-iHt))``, equal to ``(E_max - E_min) t / 2`` until it hits pi/2."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    w, v, spread = _spread(H)
    U = (v * np.exp(-1j * w * t)) @ dagger(v)
    g = unitary_g_norm(U)
    d = min(g, HALF_PI)
    psi = (v[:, -1] + v[:, 0]) / math.sqrt(2) if spread > 0 else v[:, 0]
    return QslResult(cos_d=math.cos(d), method="unitary", optimal_input=psi, raw_angle=g,
                     achieved_angle=angle(abs(np.vdot(psi, U @ psi))))


def unitary_min_time(H, theta: float) -> float:
    """Shortest time for ``exp(-iHt)`` to rotate some state by ``theta``."""
    if not 0 <= theta <= HALF_PI:
        raise ValueError("theta must lie in [0, pi/2]")
    _, _, spread = _spread(H)
    if theta == 0:
        return 0.0
    if spread == 0:
        return math.inf
    return 2 * theta / spread


# ---------------------------------------------------------------------------
# general channels

def _output_factors(kraus, psi, ancilla_dim):
    eye = np.eye(ancilla_dim)
    return np.stack([np.kron(f, eye) @ psi for f in kraus], axis=1)


def achieved_fidelity(k1: ch.KrausChannel, k2: ch.KrausChannel, psi, ancilla_dim: int) -> float:
    """Fidelity between ``K1 (x) id`` and ``K2 (x) id`` applied to ``psi``."""
    return fidelity_from_factors(_output_factors(k1.kraus, psi, ancilla_dim),
                                 _output_factors(k2.kraus, psi, ancilla_dim))


def channel_distance(k1: ch.KrausChannel, k2: ch.KrausChannel, tol: float = DEFAULT_TOL,
                     max_iter: int = 200) -> QslResult:
    """Exact ``d(K1, K2)`` from the SDP pair, with a certifying input state.

    The input is a purification of the optimal system state. The reported
    cosine is the fidelity that input actually achieves, which can only
    overestimate the true minimum; the duality gap bounds the excess. This
    keeps ``d`` exactly 0 for identical channels, where ``arccos`` would
    magnify a 1e-11 solver error into 1e-6 radians. Without a usable state
    the contraction-side value is reported instead.
    """
    if k1.dim != k2.dim:
        raise ValueError(f"channel dimensions differ: {k1.dim} vs {k2.dim}")
    D = max(k1.num_kraus, k2.num_kraus)
    a, b = ch.pad_kraus(k1, D), ch.pad_kraus(k2, D)
    sol = solve_channel_sdp(a.kraus, b.kraus, tol=tol, max_iter=max_iter)
    cos_d = min(sol.primal_value, 1.0)
    try:
        psi, na = purify(sol.rho_opt)
        achieved_cos = achieved_fidelity(a, b, psi, na)
        achieved = angle(achieved_cos)
    except ValueError:
        psi, na, achieved = None, 1, None
    else:
        if abs(achieved_cos - cos_d) <= CERT_GAP:
            cos_d = achieved_cos
    d = angle(cos_d)
    certified = (
        sol.converged
        and sol.gap <= CERT_GAP
        and sol.max_residual <= CERT_GAP
        and achieved is not None
        and abs(achieved - d) <= CERT_ANGLE
    )
    return QslResult(cos_d=cos_d, method="sdp", W_opt=sol.W_opt, optimal_input=psi,
                     ancilla_dim=na, gap=sol.gap, achieved_angle=achieved, certified=certified,
                     solution=sol)


def distance_to_identity(channel: ch.KrausChannel, tol: float = DEFAULT_TOL) -> QslResult:
    return channel_distance(ch.identity_channel(channel.dim), channel, tol=tol)


# ---------------------------------------------------------------------------
# closed forms

def closed_form_amplitude_damping(profile, t: float) -> QslResult:
    p = ch.survival_probability(ch.as_profile(profile), t)
    W = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    excited = np.array([0.0, 1.0], dtype=complex)
    return QslResult(cos_d=math.sqrt(p), method="closed-form-ad", W_opt=W, optimal_input=excited)


def dephasing_optimal_w(p: float, omega: float, t: float) -> np.ndarray:
    """Saturating contraction for dephasing; only its first row is nonzero."""
    norm = math.sqrt(max(1.0 + p * math.cos(omega * t), 0.0))
    W = np.zeros((2, 2), dtype=complex)
    if norm < 1e-15:
        W[0, 1] = 1j
    else:
        W[0, 0] = math.sqrt(1 + p) * math.cos(omega * t / 2) / norm
        W[0, 1] = 1j * math.sqrt(max(1 - p, 0.0)) * math.sin(omega * t / 2) / norm
    return W


def closed_form_dephasing(profile, omega: float, t: float, check: bool = True) -> QslResult:
    p = ch.survival_probability(ch.as_profile(profile), t)
    cos_d = math.sqrt(max((1 + p * math.cos(omega * t)) / 2, 0.0))
    W = dephasing_optimal_w(p, omega, t)
    if check:
        k = ch.dephasing(profile, omega, t).kraus
        value = kw_objective(ch.pad_identity_kraus(2).kraus, k, W)
        if abs(value - cos_d) > 1e-10:
            raise AssertionError(f"saturating W gives {value!r}, expected {cos_d!r}")
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    return QslResult(cos_d=cos_d, method="closed-form-dephasing", W_opt=W, optimal_input=plus)


# ---------------------------------------------------------------------------
# bounds

def alpha_coefficients(channel: ch.KrausChannel, tol: float = 1e-8) -> Optional[np.ndarray]:
    """Minimum-norm ``w`` with ``I = sum_i w_i F_i``, or None if I is not in the span."""
    n = channel.dim
    A = channel.kraus.reshape(channel.num_kraus, -1).T
    target = np.eye(n).reshape(-1)
    w, *_ = np.linalg.lstsq(A, target, rcond=None)
    if np.linalg.norm(A @ w - target) > tol * math.sqrt(n):
        return None
    return w


def alpha_bound(channel: ch.KrausChannel) -> Optional[float]:
    """``alpha = 1/||w||`` with ``cos d(I, K) >= alpha``; None when I is outside the span."""
    w = alpha_coefficients(channel)
    if w is None:
        return None
    return float(1.0 / np.linalg.norm(w))


def alpha_contraction(channel: ch.KrausChannel) -> Optional[np.ndarray]:
    """The row contraction ``W'`` realizing the alpha bound (first row ``alpha w``)."""
    w = alpha_coefficients(channel)
    if w is None:
        return None
    W = np.zeros((channel.num_kraus, channel.num_kraus), dtype=complex)
    W[0] = w / np.linalg.norm(w)
    return W


def dephasing_alpha(profile, omega: float, t: float) -> float:
    p = ch.survival_probability(ch.as_profile(profile), t)
    den = 2 - 2 * p * math.cos(omega * t)
    if p >= 1.0 or den <= 0:
        return 1.0
    return math.sqrt(1 - p * p) / math.sqrt(den)


def row_structured_bound(channel: ch.KrausChannel, tol: float = DEFAULT_TOL) -> float:
    """Best ``lambda_min(sum_i w_i F_i + h.c.)/2`` over unit-ball vectors ``w``.

    A lower bound on ``cos d(I, K)``; positive values rule out
    orthogonalization.
    """
    return min(row_problem_value(channel.kraus, tol=tol).primal_value, 1.0)


def composite_alpha_bound(channel: ch.KrausChannel, N: int) -> float:
    """Upper bound ``arccos(alpha^N)`` on ``d(I, K^(x)N)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = alpha_bound(channel)
    if a is None:
        raise ValueError("identity is not in the Kraus span; no alpha bound")
    return angle(a ** N)


def dephasing_beta(profile, omega: float, t: float) -> float:
    p = ch.survival_probability(ch.as_profile(profile), t)
    return math.sqrt(max((1 + p * math.cos(omega * t)) / 2, 0.0))


def separable_angle(profile, omega: float, t: float, N: int) -> float:
    """Angle reached by ``|+...+>`` under ``N`` independent dephasing channels."""
    return angle(dephasing_beta(profile, omega, t) ** N)


def ghz_angle(profile, omega: float, t: float, N: int) -> float:
    p = ch.survival_probability(ch.as_profile(profile), t)
    return angle(math.sqrt(max((1 + p ** N * math.cos(N * omega * t)) / 2, 0.0)))


def dephasing_bounds(profile, omega: float, t: float, N: int) -> BoundPair:
    return BoundPair(
        lower=separable_angle(profile, omega, t, N),
        upper=angle(dephasing_alpha(profile, omega, t) ** N),
        N=N,
    )


# ---------------------------------------------------------------------------
# optimal inputs

def system_optimal_input(k1: ch.KrausChannel, k2: ch.KrausChannel, rho) -> Optional[np.ndarray]:
    """An optimal input on the system alone, when one can be read off ``rho``.

    If ``rho`` is pure its leading eigenvector is returned. If every
    ``F1_i^H F2_j`` is diagonal the objective only sees ``diag(rho)``, so the
    state with amplitudes ``sqrt(diag(rho))`` is optimal too. Otherwise None.
    """
    w, v = np.linalg.eigh(rho)
    if w[-1] >= 1 - 1e-6:
        return v[:, -1]
    ops = np.einsum("iba,jbc->ijac", np.conj(k1.kraus), k2.kraus)
    off = ops * (1 - np.eye(k1.dim))
    if np.max(np.abs(off), initial=0.0) <= 1e-14:
        p = np.clip(np.real(np.diag(rho)), 0.0, None)
        return (np.sqrt(p / p.sum())).astype(complex)
    return None


def input_entanglement(channel: ch.KrausChannel, tol: float = DEFAULT_TOL) -> dict:
    """Entanglement of optimal inputs for ``d(I, channel)`` on qubit registers.

    Returns the distance result plus two normalized entropies: across the
    system|ancilla cut of the purified optimal state, and across the
    first-qubit|rest cut of a system-only optimal state (NaN when none is
    available).
    """
    res = distance_to_identity(channel, tol=tol)
    rho = res.solution.rho_opt
    n = channel.dim
    nq = int(round(math.log2(n)))
    ent_pur = (entanglement_entropy(res.optimal_input, [0], [n, res.ancilla_dim])
               if res.optimal_input is not None else float("nan"))
    ident = ch.identity_channel(n)
    psi = system_optimal_input(ch.pad_kraus(ident, channel.num_kraus), channel, rho)
    if psi is None or nq < 2:
        ent_sys, sys_angle = float("nan"), float("nan")
    else:
        ent_sys = entanglement_entropy(psi, [0], [2] * nq)
        sys_angle = angle(achieved_fidelity(ident, channel, psi, 1))
    return {
        "result": res,
        "purification": ent_pur,
        "system": ent_sys,
        "system_state": psi,
        "system_angle": sys_angle,
    }


# ---------------------------------------------------------------------------
# minimum time

@dataclass
class MinTimeResult:
    time: Optional[float]
    theta: float
    method: str
    reason: str = ""
    alpha_min: Optional[float] = None

    @property
    def reachable(self) -> bool:
        return self.time is not None


def model_distance(model, t: float, tol: float = DEFAULT_TOL) -> float:
    """``d(I, K_t)`` for a channel model, via a closed form where one exists."""
    if isinstance(model, ch.AmplitudeDamping):
        return closed_form_amplitude_damping(model.profile, t).d
    if isinstance(model, ch.Dephasing):
        return closed_form_dephasing(model.profile, model.omega, t, check=False).d
    if isinstance(model, ch.Unitary):
        return unitary_distance(model.H, t).d
    return distance_to_identity(model.channel(t), tol=tol).d


def _alpha_scan(model, grid):
    alphas = []
    for t in grid:
        a = alpha_bound(model.channel(t))
        if a is None:
            return None
        alphas.append(a)
    return np.array(alphas)


def min_time(model, theta: float, t_max: float = 50.0, step: float = 0.01,
             tol: float = DEFAULT_TOL) -> MinTimeResult:
    """Smallest ``t`` with ``d(I, K_t) >= theta``.

    Amplitude damping with a constant rate and unitary models are inverted
    analytically. Everything else is scanned on ``[0, t_max]`` with spacing
    ``step`` and the first upward crossing is bisected to 1e-9.
    """
    if not 0 <= theta <= HALF_PI:
        raise ValueError("theta must lie in [0, pi/2]")
    if theta == 0:
        return MinTimeResult(0.0, theta, "trivial")
    if isinstance(model, ch.AmplitudeDamping) and isinstance(model.profile, ch.ConstantRate):
        g = model.profile.gamma
        if theta >= HALF_PI or g == 0:
            return MinTimeResult(None, theta, "closed-form-ad",
                                 "unreachable: cos d = sqrt(P(t)) > 0 for every finite t")
        return MinTimeResult(2.0 / g * math.log(1.0 / math.cos(theta)), theta, "closed-form-ad")
    if isinstance(model, ch.Unitary):
        t = unitary_min_time(model.H, theta)
        if math.isinf(t):
            return MinTimeResult(None, theta, "unitary", "unreachable: E_max = E_min")
        return MinTimeResult(t, theta, "unitary")

    grid = np.arange(0.0, t_max + 0.5 * step, step)
    grid = grid[grid <= t_max]
    f = lambda t: model_distance(model, t, tol) - theta
    prev = f(grid[0])
    if prev >= 0:
        return MinTimeResult(float(grid[0]), theta, "scan")
    for a, b in zip(grid[:-1], grid[1:]):
        cur = f(b)
        if prev < 0 <= cur:
            t = scipy.optimize.bisect(f, a, b, xtol=1e-9)
            return MinTimeResult(float(t), theta, "scan")
        prev = cur

    alphas = _alpha_scan(model, grid)
    if alphas is not None and np.all(alphas > 0) and np.max(np.arccos(np.clip(alphas, 0, 1))) < theta:
        return MinTimeResult(None, theta, "scan",
                             "unreachable: alpha-bound proves d < theta on the grid",
                             alpha_min=float(np.min(alphas)))
    if isinstance(model, ch.AmplitudeDamping) and theta >= HALF_PI:
        return MinTimeResult(None, theta, "scan",
                             "unreachable: cos d = sqrt(P(t)) > 0 for every finite t")
    return MinTimeResult(None, theta, "scan", f"not reached by t_max = {t_max}",
                         alpha_min=None if alphas is None else float(np.min(alphas)))
