"""Kraus-form quantum channels and the time-dependent noise models."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .linalg import as_hermitian, dagger, expm_hermitian

COMPLETENESS_TOL = 1e-10
MAX_TENSOR_DIM = 64


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map ``rho -> sum_i F_i rho F_i^H``.

    ``kraus`` is stored as a read-only array of shape ``(D, n, n)``.
    """

    kraus: np.ndarray
    label: str = ""

    def __post_init__(self):
        k = np.array(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1 or k.shape[1] != k.shape[2]:
            raise ChannelError(f"Kraus operators must form a (D, n, n) stack, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ChannelError("Kraus operators have non-finite entries")
        err = completeness_residual(k)
        if err > COMPLETENESS_TOL:
            raise ChannelError(f"Kraus operators are not trace preserving (residual {err:.3g})")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def num_kraus(self) -> int:
        return self.kraus.shape[0]

    def __len__(self):
        return self.num_kraus

    def __eq__(self, other):
        if not isinstance(other, KrausChannel):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.kraus, other.kraus)

    __hash__ = None


def completeness_residual(kraus) -> float:
    k = np.asarray(kraus, dtype=complex)
    s = np.einsum("iba,ibc->ac", np.conj(k), k)
    return float(np.max(np.abs(s - np.eye(k.shape[1]))))


# ---------------------------------------------------------------------------
# decay profiles

@dataclass(frozen=True)
class ConstantRate:
    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ValueError("decay rate must be finite")

    def integrated_rate(self, t: float) -> float:
        return self.gamma * t


@dataclass(frozen=True)
class TabulatedRate:
    """Time-dependent rate sampled on a grid starting at ``t = 0``.

    The rate is linearly interpolated between samples and integrated with the
    trapezoid rule, which is exact for the interpolant.
    """

    times: tuple
    rates: tuple
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        if times.ndim != 1 or times.shape != rates.shape or len(times) < 2:
            raise ValueError("times and rates must be 1-d sequences of equal length >= 2")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(rates))):
            raise ValueError("times and rates must be finite")
        if times[0] != 0.0:
            raise ValueError("tabulated profiles must start at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly ascending")
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "rates", tuple(rates))
        object.__setattr__(self, "_cumulative", cumulative_trapezoid(rates, times, initial=0.0))

    def integrated_rate(self, t: float) -> float:
        times = np.asarray(self.times)
        rates = np.asarray(self.rates)
        if t < 0 or t > times[-1]:
            raise ValueError(f"t = {t} outside tabulated range [0, {times[-1]}]")
        k = min(int(np.searchsorted(times, t, side="right")) - 1, len(times) - 2)
        h = t - times[k]
        r = rates[k] + (rates[k + 1] - rates[k]) * h / (times[k + 1] - times[k])
        return float(self._cumulative[k] + 0.5 * h * (rates[k] + r))


DecayProfile = Union[ConstantRate, TabulatedRate]


def survival_probability(profile: DecayProfile, t: float) -> float:
    """``P(t) = exp(-integral_0^t gamma(s) ds)``.

    Raises if the integrated rate turns negative, i.e. ``P`` would exceed 1.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if isinstance(profile, ConstantRate):
        if profile.gamma < 0:
            raise ValueError("constant decay rate must be nonnegative")
        return float(np.exp(-profile.gamma * t))
    g = profile.integrated_rate(t)
    if g < -1e-15:
        raise ValueError(f"integrated rate {g:.3g} < 0 at t = {t}: P(t) would exceed 1")
    return float(np.exp(-max(g, 0.0)))


def as_profile(profile) -> DecayProfile:
    if isinstance(profile, (ConstantRate, TabulatedRate)):
        return profile
    return ConstantRate(float(profile))


# ---------------------------------------------------------------------------
# constructors

def amplitude_damping(profile, t: float) -> KrausChannel:
    p = survival_probability(as_profile(profile), t)
    f1 = np.array([[1.0, 0.0], [0.0, np.sqrt(p)]])
    f2 = np.array([[0.0, np.sqrt(1.0 - p)], [0.0, 0.0]])
    return KrausChannel(np.array([f1, f2]), label=f"amplitude-damping(t={t!r})")


def dephasing(profile, omega: float, t: float) -> KrausChannel:
    p = survival_probability(as_profile(profile), t)
    ph = np.exp(-0.5j * omega * t)
    f1 = np.sqrt((1.0 + p) / 2) * np.diag([ph, np.conj(ph)])
    f2 = np.sqrt((1.0 - p) / 2) * np.diag([ph, -np.conj(ph)])
    return KrausChannel(np.array([f1, f2]), label=f"dephasing(omega={omega!r}, t={t!r})")


def unitary_channel(H, t: float) -> KrausChannel:
    h = as_hermitian(H, "H")
    return KrausChannel(expm_hermitian(h, t)[None], label=f"unitary(t={t!r})")


def identity_channel(n: int, num_kraus: int = 1) -> KrausChannel:
    return pad_identity_kraus(num_kraus, n)


def pad_identity_kraus(num_kraus: int, n: int = 2) -> KrausChannel:
    """The identity channel written with ``num_kraus`` operators ``{I, 0, ..., 0}``."""
    if num_kraus < 1:
        raise ValueError("need at least one Kraus operator")
    k = np.zeros((num_kraus, n, n), dtype=complex)
    k[0] = np.eye(n)
    return KrausChannel(k, label="identity")


def pad_kraus(channel: KrausChannel, num_kraus: int) -> KrausChannel:
    """Append zero operators so the channel has ``num_kraus`` of them."""
    if num_kraus < channel.num_kraus:
        raise ValueError("cannot pad to fewer operators")
    if num_kraus == channel.num_kraus:
        return channel
    extra = np.zeros((num_kraus - channel.num_kraus, channel.dim, channel.dim), dtype=complex)
    return KrausChannel(np.concatenate([channel.kraus, extra]), label=channel.label)


def tensor_power(channel: KrausChannel, N: int) -> KrausChannel:
    """``channel`` acting independently on each of ``N`` subsystems."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if channel.dim ** N > MAX_TENSOR_DIM:
        raise ChannelError(
            f"tensor power dimension {channel.dim}^{N} exceeds the budget of {MAX_TENSOR_DIM}; "
            "reduce N"
        )
    if N == 1:
        return channel
    ops = [reduce(np.kron, combo) for combo in itertools.product(channel.kraus, repeat=N)]
    return KrausChannel(np.array(ops), label=f"({channel.label})^{N}")


def random_channel(n: int, num_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Random channel from an isometry: a Haar-like ``(D n) x n`` column block."""
    z = rng.standard_normal((num_kraus * n, n)) + 1j * rng.standard_normal((num_kraus * n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(q.reshape(num_kraus, n, n), label=f"random(n={n}, D={num_kraus})")


# ---------------------------------------------------------------------------
# application

def apply(channel: KrausChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise ValueError(f"state shape {rho.shape} does not match channel dimension {channel.dim}")
    k = channel.kraus
    out = np.einsum("iab,bc,idc->ad", k, rho, np.conj(k))
    return 0.5 * (out + dagger(out))


def extended_kraus(channel: KrausChannel, ancilla_dim: int) -> np.ndarray:
    """Kraus operators ``F_i (x) I_A``."""
    eye = np.eye(ancilla_dim)
    return np.array([np.kron(f, eye) for f in channel.kraus])


def apply_extended(channel: KrausChannel, rho_sa, ancilla_dim: int) -> np.ndarray:
    """Apply ``channel (x) id_A`` to a system+ancilla state (system first)."""
    rho_sa = np.asarray(rho_sa, dtype=complex)
    n = channel.dim * ancilla_dim
    if rho_sa.shape != (n, n):
        raise ValueError(f"state shape {rho_sa.shape} does not match {channel.dim} x {ancilla_dim}")
    t = rho_sa.reshape(channel.dim, ancilla_dim, channel.dim, ancilla_dim)
    k = channel.kraus
    out = np.einsum("iab,bxcy,idc->axdy", k, t, np.conj(k)).reshape(n, n)
    return 0.5 * (out + dagger(out))


# ---------------------------------------------------------------------------
# time-dependent models

@dataclass(frozen=True)
class AmplitudeDamping:
    profile: DecayProfile

    def channel(self, t: float) -> KrausChannel:
        return amplitude_damping(self.profile, t)


@dataclass(frozen=True)
class Dephasing:
    profile: DecayProfile
    omega: float

    def channel(self, t: float) -> KrausChannel:
        return dephasing(self.profile, self.omega, t)


@dataclass(frozen=True)
class Unitary:
    H: np.ndarray

    def channel(self, t: float) -> KrausChannel:
        return unitary_channel(self.H, t)


@dataclass(frozen=True)
class Custom:
    """A fixed channel; its action does not depend on time."""

    fixed: KrausChannel

    def channel(self, t: float) -> KrausChannel:
        return self.fixed


@dataclass(frozen=True)
class TensorPower:
    base: object
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")

    def channel(self, t: float) -> KrausChannel:
        return tensor_power(self.base.channel(t), self.N)


ChannelModel = Union[AmplitudeDamping, Dephasing, Unitary, Custom, TensorPower]


# ---------------------------------------------------------------------------
# JSON

def matrix_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ChannelError("matrices must be nested [row][column][re, im] lists")
    return a[..., 0] + 1j * a[..., 1]


def channel_to_dict(channel: KrausChannel) -> dict:
    return {
        "dim": channel.dim,
        "kraus": [matrix_to_json(f) for f in channel.kraus],
        "label": channel.label,
    }


def channel_from_dict(data: dict) -> KrausChannel:
    try:
        dim = int(data["dim"])
        ops = [matrix_from_json(f) for f in data["kraus"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelError(f"malformed channel JSON: {exc}") from exc
    if not ops:
        raise ChannelError("channel JSON has no Kraus operators")
    if any(f.shape != (dim, dim) for f in ops):
        raise ChannelError(f"Kraus operators do not all have shape ({dim}, {dim})")
    return KrausChannel(np.array(ops), label=str(data.get("label", "")))


def save_channel(channel: KrausChannel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(channel), indent=1) + "\n")


def load_channel(path) -> KrausChannel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ChannelError(f"cannot read channel file {path}: {exc}") from exc
    return channel_from_dict(data)
