"""Sampling-based checks that bracket an exact channel distance.

Random input states can only overestimate the minimum fidelity, and random
contractions can only underestimate the maximal ``lambda_min`` objective, so
the exact ``cos d`` must lie between the two sampled extremes.

Randomness comes from numpy's counter-based Philox generator. Samples are
drawn in fixed-size chunks, so the first ``k`` samples are the same for any
requested total of at least ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import channels as ch
from .linalg import dagger
from .states import fidelity

CHUNK = 1024
INTERIOR_FRACTION = 0.2


@dataclass
class OracleReport:
    samples: int
    seed: int
    best_value: float
    witness: np.ndarray
    violation: float
    reference_cos: Optional[float] = None
    threshold: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.violation <= self.threshold


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _gaussian_chunks(rng, samples, shape):
    done = 0
    while done < samples:
        z = rng.standard_normal((CHUNK,) + shape) + 1j * rng.standard_normal((CHUNK,) + shape)
        take = min(CHUNK, samples - done)
        yield z[:take]
        done += take


def haar_states(samples: int, dim: int, seed: int) -> np.ndarray:
    """``samples`` Haar-random unit vectors of length ``dim``."""
    parts = [z / np.linalg.norm(z, axis=1, keepdims=True)
             for z in _gaussian_chunks(_rng(seed), samples, (dim,))]
    return np.concatenate(parts)


def random_state_min_fidelity(channel: ch.KrausChannel, ancilla_dim: Optional[int] = None,
                              samples: int = 10_000, seed: int = 0,
                              exact_cos: Optional[float] = None,
                              reference: Optional[ch.KrausChannel] = None) -> OracleReport:
    """Smallest output fidelity over Haar-random system+ancilla inputs.

    Compares ``channel (x) id`` against ``reference (x) id`` (the identity when
    ``reference`` is None). With ``exact_cos`` given, ``violation`` is
    ``exact_cos - best_value``, which sampling keeps at or below zero.
    """
    n = channel.dim
    a = n if ancilla_dim is None else int(ancilla_dim)
    if a < 1 or samples < 1:
        raise ValueError("ancilla_dim and samples must be >= 1")
    psi = haar_states(samples, n * a, seed)
    k2 = ch.extended_kraus(channel, a)
    out2 = np.einsum("kab,sb->ska", k2, psi)
    if reference is None:
        overlaps = np.einsum("sa,ska->sk", np.conj(psi), out2)
        fids = np.sqrt(np.sum(np.abs(overlaps) ** 2, axis=1))
    else:
        k1 = ch.extended_kraus(reference, a)
        out1 = np.einsum("kab,sb->ska", k1, psi)
        fids = np.array([
            fidelity(np.einsum("ka,kb->ab", o1, np.conj(o1)), np.einsum("ka,kb->ab", o2, np.conj(o2)))
            for o1, o2 in zip(out1, out2)
        ])
    i = int(np.argmin(fids))
    best = float(min(fids[i], 1.0))
    violation = float("nan") if exact_cos is None else exact_cos - best
    return OracleReport(samples, seed, best, psi[i], violation, exact_cos)


def random_contractions(samples: int, rows: int, cols: int, seed: int) -> np.ndarray:
    """Random matrices on the unit sphere of the operator norm, with a share
    scaled into the interior of the ball."""
    rng = _rng(seed)
    out = []
    for z in _gaussian_chunks(rng, samples, (rows, cols)):
        norms = np.linalg.norm(z, ord=2, axis=(1, 2))
        w = z / norms[:, None, None]
        radius = np.where(rng.random(CHUNK)[: len(z)] < INTERIOR_FRACTION,
                          rng.random(CHUNK)[: len(z)], 1.0)
        out.append(w * radius[:, None, None])
    return np.concatenate(out)


def random_w_max(channel1: ch.KrausChannel, channel2: ch.KrausChannel, samples: int = 1000,
                 seed: int = 0, exact_cos: Optional[float] = None,
                 inject: Iterable[np.ndarray] = ()) -> OracleReport:
    """Largest ``lambda_min(K_W + K_W^H)/2`` over sampled contractions.

    The identity-like contraction and every matrix in ``inject`` are always
    evaluated. ``violation`` is ``best_value - exact_cos``.
    """
    if channel1.dim != channel2.dim:
        raise ValueError("channel dimensions differ")
    D = max(channel1.num_kraus, channel2.num_kraus)
    f1 = ch.pad_kraus(channel1, D).kraus
    f2 = ch.pad_kraus(channel2, D).kraus
    fixed = [np.eye(D, dtype=complex)] + [np.asarray(w, dtype=complex) for w in inject]
    Ws = np.concatenate([np.array(fixed), random_contractions(samples, D, D, seed)])
    G = np.einsum("iba,jbc->ijac", np.conj(f1), f2)
    K = np.einsum("sij,ijab->sab", Ws, G)
    vals = 0.5 * np.linalg.eigvalsh(K + dagger(K))[:, 0]
    i = int(np.argmax(vals))
    best = float(vals[i])
    violation = float("nan") if exact_cos is None else best - exact_cos
    return OracleReport(samples, seed, best, Ws[i], violation, exact_cos)


def certify_saturation(state, channel: ch.KrausChannel, expected_cos: float,
                       ancilla_dim: int = 1) -> OracleReport:
    """``|F(state, channel (x) id (state)) - expected_cos|``; passes at 1e-5."""
    psi = np.asarray(state, dtype=complex)
    if psi.size != channel.dim * ancilla_dim:
        raise ValueError(f"state size {psi.size} != {channel.dim} x {ancilla_dim}")
    out = ch.apply_extended(channel, np.outer(psi, np.conj(psi)), ancilla_dim)
    f = fidelity(psi, out)
    return OracleReport(1, 0, f, psi, abs(f - expected_cos), expected_cos, threshold=1e-5)
