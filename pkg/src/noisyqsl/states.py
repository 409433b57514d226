"""Quantum states: validation, fidelity, purification and entanglement.

Pure states are plain 1-d complex arrays, mixed states 2-d arrays.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .linalg import dagger, matrix_sqrt_psd, partial_trace, trace_norm

MAX_QUBITS = 6


def check_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity (to ``-1e-9``)."""
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {r.shape}")
    if np.max(np.abs(r - dagger(r)), initial=0.0) > tol:
        raise ValueError("density matrix is not Hermitian")
    r = 0.5 * (r + dagger(r))
    if abs(np.trace(r).real - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(r).real:.12g}")
    if np.linalg.eigvalsh(r)[0] < -1e-9:
        raise ValueError("density matrix is not positive semidefinite")
    return r


def normalize(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero vector is not a state")
    return v / nrm


def check_pure_state(psi, tol: float = 1e-12) -> np.ndarray:
    v = np.asarray(psi, dtype=complex)
    if v.ndim != 1:
        raise ValueError("pure state must be a 1-d amplitude vector")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"pure state has norm {np.linalg.norm(v):.15g}")
    return v


def density(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex)
    return np.outer(v, np.conj(v))


def fidelity(state1, state2) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``.

    Either argument may be an amplitude vector. With a pure first argument
    this reduces to ``sqrt(<psi|rho2|psi>)``.
    """
    a = np.asarray(state1, dtype=complex)
    b = np.asarray(state2, dtype=complex)
    if a.ndim == 2 and b.ndim == 1:
        a, b = b, a
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1:
        if b.ndim == 1:
            f = abs(np.vdot(a, b))
        else:
            f = np.sqrt(max(float(np.real(np.conj(a) @ b @ a)), 0.0))
    else:
        s = matrix_sqrt_psd(a)
        f = float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(s @ b @ s), 0.0, None))))
    return float(min(f, 1.0))


def fidelity_from_factors(A1, A2) -> float:
    """Fidelity of ``A1 A1^H`` and ``A2 A2^H`` as ``||A1^H A2||_1``.

    Avoids matrix square roots, so it stays accurate near fidelity 1 and
    for rank-deficient states.
    """
    return min(trace_norm(dagger(np.asarray(A1)) @ np.asarray(A2)), 1.0)


def bures_angle(state1, state2) -> float:
    return float(np.arccos(np.clip(fidelity(state1, state2), 0.0, 1.0)))


def purify(rho, tol: float = 1e-10) -> tuple[np.ndarray, int]:
    """Purification ``sum_k sqrt(p_k) |e_k>|k>`` on system (x) ancilla.

    Returns:
        The amplitude vector (system index most significant) and the ancilla
        dimension, equal to the number of eigenvalues above ``tol``.
    """
    r = check_density_matrix(rho, tol=1e-9)
    w, v = np.linalg.eigh(r)
    keep = np.flatnonzero(w > tol)[::-1]
    p = w[keep] / np.sum(w[keep])
    psi = (v[:, keep] * np.sqrt(p)[None, :]).reshape(-1)
    return psi, len(keep)


def ghz(N: int) -> np.ndarray:
    if not 1 <= N <= MAX_QUBITS:
        raise ValueError(f"N must be in 1..{MAX_QUBITS}")
    psi = np.zeros(2 ** N, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def separable_plus(N: int) -> np.ndarray:
    if not 1 <= N <= MAX_QUBITS:
        raise ValueError(f"N must be in 1..{MAX_QUBITS}")
    return np.full(2 ** N, 2 ** (-N / 2), dtype=complex)


def entanglement_entropy(psi, cut: Sequence[int], dims: Sequence[int]) -> float:
    """Von Neumann entropy across a bipartition, normalized to ``[0, 1]``.

    Args:
        psi: Pure state amplitudes.
        cut: Subsystem indices forming one side of the bipartition.
        dims: Subsystem dimensions.

    The entropy is divided by the log of the smaller side's dimension, so a
    maximally entangled state gives 1.
    """
    v = np.asarray(psi, dtype=complex)
    dims = [int(d) for d in dims]
    if v.ndim != 1 or v.size != int(np.prod(dims)):
        raise ValueError(f"state of size {v.size} does not match dims {dims}")
    cut = sorted(set(cut))
    da = int(np.prod([dims[i] for i in cut])) if cut else 1
    db = v.size // da
    if min(da, db) == 1:
        return 0.0
    rho_a = partial_trace(density(v), dims, cut)
    w = np.linalg.eigvalsh(rho_a)
    w = w[w > 1e-12]
    s = -float(np.sum(w * np.log(w)))
    return max(0.0, s / np.log(min(da, db)))
