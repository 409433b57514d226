"""Dense complex linear algebra used throughout the package.

Everything here is a thin, validating layer over LAPACK (via numpy). Inputs
are never modified; outputs are fresh arrays.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_CLIP_TOL = 1e-10
PSD_ERROR_TOL = 1e-8
SVD_ZERO_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def as_hermitian(a, name: str = "matrix", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square Hermitian matrix and return its exact Hermitian part."""
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not is_hermitian(m, tol):
        err = np.max(np.abs(m - dagger(m)))
        raise ValueError(f"{name} is not Hermitian (max |A - A^H| = {err:.3g})")
    return 0.5 * (m + dagger(m))


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        Real eigenvalues in ascending order and the matrix whose columns are
        the corresponding orthonormal eigenvectors, so ``a = V diag(w) V^H``.
    """
    h = as_hermitian(a)
    w, v = np.linalg.eigh(h)
    return w, v


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition ``m = U diag(s) V^H``.

    Returns ``(U, s, V)`` with ``s`` descending. Singular values below
    ``1e-12 * s_max`` are set to exactly zero.
    """
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, _zero_small(s), dagger(vh)


def _zero_small(s):
    if s.size and s[0] > 0:
        s = np.where(s < SVD_ZERO_TOL * s[0], 0.0, s)
    return s


def singular_values(m) -> np.ndarray:
    return _zero_small(np.linalg.svd(as_matrix(m), compute_uv=False))


def operator_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def trace_norm(m) -> float:
    return float(np.sum(singular_values(m)))


def matrix_sqrt_psd(a) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-8 * ||a||, 0)`` are treated as solver noise and
    clipped to zero; anything more negative is rejected.
    """
    w, v = eig_hermitian(a)
    scale = max(float(np.max(np.abs(w), initial=0.0)), 1.0)
    if w.size and w[0] < -PSD_ERROR_TOL * scale:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    w = np.clip(w, 0.0, None)
    r = (v * np.sqrt(w)) @ dagger(v)
    return 0.5 * (r + dagger(r))


def expm_hermitian(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h``, via its eigendecomposition."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices (left to right)."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Args:
        rho: Square matrix on the tensor product of subsystems of sizes ``dims``.
        dims: Subsystem dimensions, most significant first.
        keep: Indices of subsystems to retain, in any order. The result is
            ordered as in ``dims``. An empty ``keep`` gives a 1x1 matrix
            holding the full trace.
    """
    m = as_matrix(rho, "rho")
    dims = [int(d) for d in dims]
    total = int(np.prod(dims)) if dims else 1
    if m.shape != (total, total):
        raise ValueError(f"dims {dims} do not match matrix shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    nsys = len(dims)
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if nsys > len(letters):
        raise ValueError("at most 26 subsystems are supported")
    row = list(letters[:nsys])
    col = [c.upper() for c in row]
    for i in range(nsys):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kd, kd)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
