"""Primal-dual interior-point solver for small dense SDPs, and the
channel-distance SDP pair built on it.

The solver works on block-diagonal problems in the standard pair

    (X)  minimize    Tr(C X)
         subject to  Tr(A_k X) = b_k,   X >= 0
    (y)  maximize    b . y
         subject to  C - sum_k y_k A_k = Z >= 0

with Hermitian (complex) or symmetric (real) blocks and real ``y``. Steps use
Nesterov-Todd scaling with a Mehrotra predictor-corrector.

For the channel distance the ``y`` problem is

    maximize    t / 2
    subject to  [[I, W^H], [W, I]] >= 0
                K_W + K_W^H - t I >= 0,      K_W = sum_ij w_ij F1_i^H F2_j

and the ``X`` problem is its dual over a system state ``rho`` and Hermitian
``P, Q``:

    minimize    (Tr P + Tr Q) / 2
    subject to  [[P, M(rho)^H], [M(rho), Q]] >= 0,  rho >= 0,  Tr rho = 1

with ``M(rho)_ij = Tr(rho F1_i^H F2_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import dagger, operator_norm, trace_norm

DEFAULT_TOL = 1e-10
MAX_ITER = 200


@dataclass
class DenseBlock:
    """A block whose constraint matrices are stored densely.

    ``A[k]`` is the coefficient matrix of variable ``index[k]``; variables not
    listed have a zero coefficient in this block.
    """

    C: np.ndarray
    A: np.ndarray
    index: np.ndarray

    @property
    def size(self) -> int:
        return self.C.shape[0]

    def op(self, X, m):
        out = np.zeros(m)
        k = len(self.index)
        out[self.index] = np.real(self.A.reshape(k, -1) @ X.T.reshape(-1))
        return out

    def adj(self, y):
        return np.tensordot(y[self.index], self.A, axes=1)

    def schur(self, S, M):
        k = len(self.index)
        G = S @ self.A @ S
        blk = np.real(np.conj(self.A.reshape(k, -1)) @ G.reshape(k, -1).T)
        M[np.ix_(self.index, self.index)] += blk


@dataclass
class SparseBlock:
    """A block whose constraint matrices are short sums of matrix units.

    Variable ``index[k]`` has coefficient ``sum_a vals[k, a] e_{rows[k, a]}
    e_{cols[k, a]}^T``; each sum must be Hermitian.
    """

    C: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    index: np.ndarray

    @property
    def size(self) -> int:
        return self.C.shape[0]

    def op(self, X, m):
        out = np.zeros(m)
        out[self.index] = np.real(np.sum(self.vals * X[self.cols, self.rows], axis=1))
        return out

    def adj(self, y):
        out = np.zeros_like(self.C)
        np.add.at(out, (self.rows, self.cols), y[self.index][:, None] * self.vals)
        return out

    def schur(self, S, M):
        p, q, c = self.rows, self.cols, self.vals
        blk = np.zeros((len(self.index), len(self.index)), dtype=S.dtype)
        for a in range(p.shape[1]):
            for b in range(p.shape[1]):
                blk += (c[:, a][:, None] * c[:, b][None, :]
                        * S[q[:, a][:, None], p[:, b][None, :]]
                        * S[q[:, b][None, :], p[:, a][:, None]])
        M[np.ix_(self.index, self.index)] += np.real(blk)


@dataclass
class ConicProblem:
    b: np.ndarray
    blocks: list

    @property
    def m(self) -> int:
        return len(self.b)

    def op(self, X):
        return sum(blk.op(x, self.m) for blk, x in zip(self.blocks, X))

    def adj(self, y):
        return [blk.adj(y) for blk in self.blocks]

    def primal_objective(self, X) -> float:
        return float(sum(np.real(np.vdot(blk.C, x)) for blk, x in zip(self.blocks, X)))


@dataclass
class ConicResult:
    y: np.ndarray
    X: list
    Z: list
    iterations: int
    converged: bool
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float
    x_objective: float
    y_objective: float
    # per iterate: (x objective, y objective, x equality residual, y equality residual)
    history: list = field(default_factory=list)


def _herm(a):
    return 0.5 * (a + dagger(a))


def _max_step(lam, d):
    # largest a with diag(lam) + a * d >= 0
    s = 1.0 / np.sqrt(lam)
    e = np.linalg.eigvalsh(_herm(s[:, None] * d * s[None, :]))
    lo = e[0]
    return np.inf if lo >= 0 else -1.0 / lo


def solve_conic(problem: ConicProblem, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                start=None) -> ConicResult:
    """Solve a block SDP pair with a Mehrotra predictor-corrector method.

    Args:
        problem: The block data.
        tol: Stop once the equality residuals of both sides and the absolute
            objective gap are all at most ``tol``.
        max_iter: Iteration cap; the last iterate is returned unconverged.
        start: Optional ``(X, y)`` with strictly positive definite ``X`` and
            ``C - A^T y``. Defaults to the infeasible point ``X = Z = I``,
            ``y = 0``.
    """
    b = np.asarray(problem.b, dtype=float)
    m = problem.m
    blocks = problem.blocks
    nu = sum(blk.size for blk in blocks)
    if start is None:
        X = [np.eye(blk.size, dtype=blk.C.dtype) for blk in blocks]
        y = np.zeros(m)
        Z = [np.eye(blk.size, dtype=blk.C.dtype) for blk in blocks]
    else:
        X = [np.array(x) for x in start[0]]
        y = np.array(start[1], dtype=float)
        Z = [_herm(blk.C - a) for blk, a in zip(blocks, problem.adj(y))]

    history = []
    converged = False
    it = 0
    while True:
        Aty = problem.adj(y)
        rp = b - problem.op(X)
        Rd = [_herm(blk.C - a - z) for blk, a, z in zip(blocks, Aty, Z)]
        xobj = problem.primal_objective(X)
        yobj = float(b @ y)
        pinf = float(np.max(np.abs(rp), initial=0.0))
        dinf = max(float(np.max(np.abs(r), initial=0.0)) for r in Rd)
        gap = abs(xobj - yobj)
        history.append((xobj, yobj, pinf, dinf))
        if max(pinf, dinf, gap) <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        # Nesterov-Todd scaling: G^-1 X G^-H = G^H Z G = diag(lam)
        G, lam, Wn = [], [], []
        try:
            for x, z in zip(X, Z):
                L = np.linalg.cholesky(x)
                R = np.linalg.cholesky(z)
                U, s, Vh = np.linalg.svd(dagger(R) @ L)
                g = (L @ dagger(Vh)) / np.sqrt(s)[None, :]
                G.append(g)
                lam.append(s)
                Wn.append(_herm(g @ dagger(g)))
        except np.linalg.LinAlgError:
            break

        M = np.zeros((m, m))
        for blk, w in zip(blocks, Wn):
            blk.schur(w, M)
        try:
            factor = scipy.linalg.cho_factor(M)
            solve_m = lambda r: scipy.linalg.cho_solve(factor, r)
        except np.linalg.LinAlgError:
            solve_m = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]
        base = rp + problem.op([w @ r @ w for w, r in zip(Wn, Rd)])

        def direction(Rc):
            S_hat = [2.0 * rc / (l[:, None] + l[None, :]) for rc, l in zip(Rc, lam)]
            dy = solve_m(base - problem.op([g @ s @ dagger(g) for g, s in zip(G, S_hat)]))
            dZ = [_herm(r - a) for r, a in zip(Rd, problem.adj(dy))]
            dZt = [_herm(dagger(g) @ dz @ g) for g, dz in zip(G, dZ)]
            dXt = [_herm(s - dzt) for s, dzt in zip(S_hat, dZt)]
            dX = [_herm(g @ dxt @ dagger(g)) for g, dxt in zip(G, dXt)]
            return dX, dy, dZ, dXt, dZt

        def steps(dXt, dZt):
            ap = min([1.0] + [_max_step(l, d) for l, d in zip(lam, dXt)])
            ad = min([1.0] + [_max_step(l, d) for l, d in zip(lam, dZt)])
            return ap, ad

        mu = sum(float(np.sum(l * l)) for l in lam) / nu
        dX, dy, dZ, dXt, dZt = direction([-np.diag(l * l) for l in lam])
        ap, ad = steps(dXt, dZt)
        mu_aff = sum(
            float(np.real(np.vdot(x + ap * dx, z + ad * dz))) for x, dx, z, dz in zip(X, dX, Z, dZ)
        ) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        Rc = [sigma * mu * np.eye(len(l)) - np.diag(l * l) - 0.5 * (a @ c + c @ a)
              for l, a, c in zip(lam, dXt, dZt)]
        dX, dy, dZ, dXt, dZt = direction(Rc)
        ap, ad = steps(dXt, dZt)
        ap = min(1.0, 0.98 * ap)
        ad = min(1.0, 0.98 * ad)
        X = [_herm(x + ap * dx) for x, dx in zip(X, dX)]
        y = y + ad * dy
        Z = [_herm(z + ad * dz) for z, dz in zip(Z, dZ)]

    return ConicResult(
        y=y, X=X, Z=Z, iterations=it, converged=converged, primal_infeasibility=pinf,
        dual_infeasibility=dinf, gap=gap, x_objective=xobj, y_objective=yobj, history=history,
    )


# ---------------------------------------------------------------------------
# realification

def realify(a) -> np.ndarray:
    """Real symmetric embedding ``[[Re A, -Im A], [Im A, Re A]]``.

    The spectrum of the embedding is that of ``A`` with every eigenvalue
    doubled, so positive semidefiniteness is preserved in both directions.
    """
    a = np.asarray(a, dtype=complex)
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def unrealify(r) -> np.ndarray:
    """Inverse of :func:`realify`, averaging the redundant copies."""
    r = np.asarray(r, dtype=float)
    s = r.shape[0] // 2
    re = 0.5 * (r[:s, :s] + r[s:, s:])
    im = 0.5 * (r[s:, :s] - r[:s, s:])
    return re + 1j * im


def realify_problem(problem: ConicProblem) -> ConicProblem:
    """Equivalent real problem. Its ``X`` blocks equal ``realify(X) / 2``."""
    blocks = []
    for blk in problem.blocks:
        s = blk.size
        if isinstance(blk, DenseBlock):
            blocks.append(DenseBlock(
                C=realify(blk.C), A=np.array([realify(a) for a in blk.A]), index=blk.index))
        else:
            p, q, c = blk.rows, blk.cols, blk.vals
            rows = np.concatenate([p, p + s, p + s, p], axis=1)
            cols = np.concatenate([q, q + s, q, q + s], axis=1)
            vals = np.concatenate([c.real, c.real, c.imag, -c.imag], axis=1)
            blocks.append(SparseBlock(C=realify(blk.C), rows=rows, cols=cols, vals=vals,
                                      index=blk.index))
    return ConicProblem(b=problem.b, blocks=blocks)


# ---------------------------------------------------------------------------
# channel distance SDP

def gram_operators(kraus1, kraus2) -> np.ndarray:
    """``G[i, j] = F1_i^H F2_j``, shape ``(D1, D2, n, n)``."""
    f1 = np.asarray(kraus1, dtype=complex)
    f2 = np.asarray(kraus2, dtype=complex)
    if f1.ndim != 3 or f2.ndim != 3 or f1.shape[1:] != f2.shape[1:] or f1.shape[1] != f1.shape[2]:
        raise ValueError(f"incompatible Kraus stacks {f1.shape} and {f2.shape}")
    return np.einsum("iba,jbc->ijac", np.conj(f1), f2)


def build_kw(kraus1, kraus2, W) -> np.ndarray:
    """``K_W = sum_ij w_ij F1_i^H F2_j``."""
    G = gram_operators(kraus1, kraus2)
    W = np.asarray(W, dtype=complex)
    if W.shape != G.shape[:2]:
        raise ValueError(f"W has shape {W.shape}, expected {G.shape[:2]}")
    return np.einsum("ij,ijab->ab", W, G)


def kw_objective(kraus1, kraus2, W) -> float:
    """``lambda_min(K_W + K_W^H) / 2``, the value certified by a contraction W."""
    K = build_kw(kraus1, kraus2, W)
    return 0.5 * float(np.linalg.eigvalsh(K + dagger(K))[0])


def m_matrix(kraus1, kraus2, rho) -> np.ndarray:
    """``M(rho)_ij = Tr(rho F1_i^H F2_j)``."""
    G = gram_operators(kraus1, kraus2)
    return np.einsum("ab,ijba->ij", np.asarray(rho, dtype=complex), G)


def dual_trace_norm_value(kraus1, kraus2, rho) -> float:
    """Closed-form inner minimum of the dual: ``||M(rho)||_1``."""
    return trace_norm(m_matrix(kraus1, kraus2, rho))


def channel_problem(kraus1, kraus2):
    """Block data of the channel-distance SDP pair.

    Variable 0 is ``t``; ``w_ij = y[1 + 2(i D2 + j)] + i y[2 + 2(i D2 + j)]``.
    Block 0 is the contraction constraint and block 1 the eigenvalue
    constraint. ``W`` may be rectangular (``D1 x D2``).
    """
    G = gram_operators(kraus1, kraus2)
    D1, D2, n, _ = G.shape
    m = 1 + 2 * D1 * D2
    b = np.zeros(m)
    b[0] = 0.5

    ii, jj = np.meshgrid(np.arange(D1), np.arange(D2), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    # [[I_D2, W^H], [W, I_D1]]: w_ij sits at (D2 + i, j)
    low = D2 + ii
    rows = np.empty((2 * D1 * D2, 2), dtype=int)
    cols = np.empty_like(rows)
    vals = np.empty((2 * D1 * D2, 2), dtype=complex)
    rows[0::2] = np.stack([low, jj], axis=1)
    cols[0::2] = np.stack([jj, low], axis=1)
    vals[0::2] = [-1.0, -1.0]
    rows[1::2] = rows[0::2]
    cols[1::2] = cols[0::2]
    vals[1::2] = [-1j, 1j]
    contraction = SparseBlock(C=np.eye(D1 + D2, dtype=complex), rows=rows, cols=cols, vals=vals,
                              index=np.arange(1, m))

    Gf = G.reshape(D1 * D2, n, n)
    active = np.flatnonzero(np.max(np.abs(Gf), axis=(1, 2)) > 0)
    A = [np.eye(n, dtype=complex)]
    index = [0]
    for k in active:
        g = Gf[k]
        A.append(-(g + dagger(g)))
        A.append(-1j * (g - dagger(g)))
        index += [1 + 2 * k, 2 + 2 * k]
    eigen = DenseBlock(C=np.zeros((n, n), dtype=complex), A=np.array(A), index=np.array(index))
    return ConicProblem(b=b, blocks=[contraction, eigen]), G


def _feasible_start(kraus1, kraus2, G):
    D1, D2, n, _ = G.shape
    m = 1 + 2 * D1 * D2
    y = np.zeros(m)
    y[0] = -2.0
    rho = np.eye(n) / n
    Mr = np.einsum("ab,ijba->ij", rho, G)
    X1 = np.zeros((D1 + D2, D1 + D2), dtype=complex)
    X1[:D2, :D2] = np.eye(D2)
    X1[D2:, D2:] = np.eye(D1)
    X1[D2:, :D2] = -0.5 * np.conj(Mr)
    X1[:D2, D2:] = dagger(X1[D2:, :D2])
    X2 = (rho / 2).astype(complex)
    return [X1, X2], y


@dataclass
class SdpSolution:
    """Certified solution of the channel-distance SDP pair.

    ``primal_value`` is ``max t/2`` (contraction side); ``dual_value`` is
    ``min (Tr P + Tr Q)/2`` (state side).
    """

    primal_value: float
    dual_value: float
    gap: float
    W_opt: np.ndarray
    t: float
    rho_opt: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    residuals: dict
    iterations: int
    converged: bool
    history: list

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def _neg_part(a) -> float:
    return max(0.0, -float(np.linalg.eigvalsh(_herm(a))[0]))


def solve_channel_sdp(kraus1, kraus2, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                      real: bool = False) -> SdpSolution:
    """Solve the channel-distance SDP pair for two Kraus stacks.

    Args:
        kraus1, kraus2: Arrays of shape ``(D1, n, n)`` and ``(D2, n, n)``.
        tol: Stopping tolerance on equality residuals and objective gap.
        max_iter: Interior-point iteration cap.
        real: Solve the realified problem instead of the complex one.
    """
    problem, G = channel_problem(kraus1, kraus2)
    D1, D2, n, _ = G.shape
    X0, y0 = _feasible_start(kraus1, kraus2, G)
    if real:
        rproblem = realify_problem(problem)
        res = solve_conic(rproblem, tol=tol, max_iter=max_iter,
                          start=([realify(x) / 2 for x in X0], y0))
        X = [2 * unrealify(x) for x in res.X]
    else:
        res = solve_conic(problem, tol=tol, max_iter=max_iter, start=(X0, y0))
        X = res.X
    y = res.y
    t = float(y[0])
    W = (y[1::2] + 1j * y[2::2]).reshape(D1, D2)
    rho = 2 * X[1]
    P = 2 * np.conj(X[0][:D2, :D2])
    Q = 2 * np.conj(X[0][D2:, D2:])
    Mr = np.einsum("ab,ijba->ij", rho, G)

    Z = [_herm(blk.C - a) for blk, a in zip(problem.blocks, problem.adj(y))]
    eq = np.max(np.abs(problem.b - problem.op(X)))
    residuals = {
        "contraction_psd": _neg_part(Z[0]),
        "eigen_psd": _neg_part(Z[1]),
        "dual_equality": float(eq),
        "dual_block_psd": _neg_part(np.block([[P, dagger(Mr)], [Mr, Q]])),
        "rho_psd": _neg_part(rho),
        "rho_trace": abs(float(np.real(np.trace(rho))) - 1.0),
    }
    primal_value = 0.5 * t
    dual_value = 0.5 * float(np.real(np.trace(P) + np.trace(Q)))
    return SdpSolution(
        primal_value=primal_value,
        dual_value=dual_value,
        gap=abs(primal_value - dual_value),
        W_opt=W,
        t=t,
        rho_opt=_herm(rho),
        P=_herm(P),
        Q=_herm(Q),
        residuals=residuals,
        iterations=res.iterations,
        converged=res.converged,
        history=res.history,
    )


def solve_primal(kraus1, kraus2, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SdpSolution:
    """Maximize ``t/2`` over contractions ``W``; see :func:`solve_channel_sdp`.

    Both sides are solved together, so the returned solution also carries the
    optimal state. Kraus stacks of unequal length should be padded first.
    """
    return solve_channel_sdp(kraus1, kraus2, tol=tol, max_iter=max_iter)


def solve_dual(kraus1, kraus2, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SdpSolution:
    """Minimize ``(Tr P + Tr Q)/2`` over states; see :func:`solve_channel_sdp`."""
    return solve_channel_sdp(kraus1, kraus2, tol=tol, max_iter=max_iter)


def row_problem_value(kraus, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SdpSolution:
    """Best ``lambda_min(sum_i w_i F_i + h.c.)/2`` over vectors with ``||w|| <= 1``.

    This is the channel SDP against the single-operator identity, whose
    contraction is a ``1 x D`` row.
    """
    f = np.asarray(kraus, dtype=complex)
    n = f.shape[1]
    return solve_channel_sdp(np.eye(n, dtype=complex)[None], f, tol=tol, max_iter=max_iter)


def contraction_ok(W, slack: float = 1e-8) -> bool:
    return operator_norm(W) <= 1.0 + slack
