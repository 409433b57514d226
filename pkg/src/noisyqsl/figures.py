"""Data series for the dephasing experiments (angle curves, bounds, entanglement)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.optimize

from . import channels as ch
from . import qsl
from .sdp import DEFAULT_TOL

log = logging.getLogger(__name__)

EXACT_N_DEFAULT_LIMIT = 3


@dataclass
class Table:
    header: list
    rows: list
    angle_columns: set = field(default_factory=set)

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([np.nan if r[i] is None else r[i] for r in self.rows], dtype=float)


def time_grid(t_max: float, steps: int, t_min: float = 0.0) -> np.ndarray:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not 0 <= t_min < t_max:
        raise ValueError("need 0 <= t_min < t_max")
    return np.linspace(t_min, t_max, steps)


def maximize_over_t(f: Callable[[float], float], grid: Sequence[float],
                    candidates: Sequence[float] = ()) -> tuple[float, float]:
    """Maximize ``f`` on a grid, then polish the best interior point by
    golden-section search between its neighbours.

    ``candidates`` are extra times evaluated alongside the grid.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.array([f(t) for t in grid])
    k = int(np.argmax(vals))
    best_t, best = float(grid[k]), float(vals[k])
    if 0 < k < len(grid) - 1 and vals[k] > vals[k - 1] and vals[k] > vals[k + 1]:
        res = scipy.optimize.minimize_scalar(
            lambda t: -f(t), bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden",
            options={"xtol": 1e-10},
        )
        if -res.fun > best and grid[k - 1] <= res.x <= grid[k + 1]:
            best_t, best = float(res.x), float(-res.fun)
    for t in candidates:
        v = f(t)
        if v > best:
            best_t, best = float(t), float(v)
    return best, best_t


def figure1(gamma: float = 0.1, omega: float = 1.0, t_max: float = 4 * math.pi,
            steps: int = 201, sdp: bool = False, tol: float = DEFAULT_TOL) -> Table:
    """Maximal angle ``d(I, K_t)`` under dephasing against time."""
    profile = ch.ConstantRate(gamma)
    header = ["t", "cos_d", "d"]
    if sdp:
        header += ["cos_d_sdp", "d_sdp"]
    rows = []
    for t in time_grid(t_max, steps):
        r = qsl.closed_form_dephasing(profile, omega, t)
        row = [float(t), r.cos_d, r.d]
        if sdp:
            s = qsl.distance_to_identity(ch.dephasing(profile, omega, t), tol=tol)
            row += [s.cos_d, s.d]
        rows.append(row)
    return Table(header, rows, {"d", "d_sdp"})


def figure2(gamma: float = 0.1, N: int = 5, ratio_min: float = 0.1, ratio_max: float = 10.0,
            ratios: int = 25, steps: int = 400, exact_steps: int = 40,
            force_exact: bool = False, t_window: Optional[float] = None,
            tol: float = DEFAULT_TOL) -> Table:
    """Maxima over time of the separable, exact, alpha-bound and GHZ angles
    for ``N`` dephasing qubits, swept over ``omega / gamma``.

    The exact column needs an SDP per time point; it is left empty for
    ``N > 3`` unless ``force_exact`` is set.
    """
    profile = ch.ConstantRate(gamma)
    exact = N <= EXACT_N_DEFAULT_LIMIT or force_exact
    if not exact:
        log.info("N = %d: exact column skipped (use force_exact)", N)
    elif N > EXACT_N_DEFAULT_LIMIT:
        log.warning("N = %d exact curve: each point solves a %d-dimensional SDP; this is slow",
                    N, 2 ** N)
    rows = []
    for ratio in np.geomspace(ratio_min, ratio_max, ratios):
        omega = ratio * gamma
        window = t_window if t_window is not None else 20 * max(1 / gamma, 1 / omega)
        grid = time_grid(window, steps)
        sep, t_sep = maximize_over_t(lambda t: qsl.separable_angle(profile, omega, t, N), grid)
        up_f = lambda t: qsl.angle(qsl.dephasing_alpha(profile, omega, t) ** N)
        up, t_up = maximize_over_t(up_f, grid)
        ghz, _ = maximize_over_t(lambda t: qsl.ghz_angle(profile, omega, t, N), grid)
        d_max = None
        if exact:
            model = ch.TensorPower(ch.Dephasing(profile, omega), N)
            d_f = lambda t: qsl.distance_to_identity(model.channel(t), tol=tol).d
            d_max, t_d = maximize_over_t(d_f, time_grid(window, exact_steps), [t_sep, t_up])
            up = max(up, up_f(t_d))
        rows.append([float(ratio), sep, d_max, up, ghz])
    header = ["ratio", "max_theta_sep", "max_d_exact", "max_arccos_alpha_N", "max_theta_ghz"]
    return Table(header, rows, set(header[1:]))


def figure3(gamma: float = 0.1, omega: float = 1.0, N: int = 2, t_max: float = 10.0,
            steps: int = 101, tol: float = DEFAULT_TOL) -> Table:
    """GHZ and separable angles against the exact maximal angle."""
    profile = ch.ConstantRate(gamma)
    model = ch.TensorPower(ch.Dephasing(profile, omega), N)
    rows = []
    for t in time_grid(t_max, steps):
        d = qsl.distance_to_identity(model.channel(t), tol=tol).d
        rows.append([float(t), qsl.ghz_angle(profile, omega, t, N),
                     qsl.separable_angle(profile, omega, t, N), d])
    return Table(["t", "theta_ghz", "theta_sep", "d_exact"], rows,
                 {"theta_ghz", "theta_sep", "d_exact"})


def figure4(gamma: float = 0.1, omega: float = 1.0, N: int = 2, t_max: float = 10.0,
            steps: int = 101, tol: float = DEFAULT_TOL) -> Table:
    """Entanglement of the optimal input for ``N`` dephasing qubits.

    ``ent_system`` is measured across the first-qubit|rest cut of an optimal
    input on the qubits alone; ``ent_purification`` across the
    system|ancilla cut of the purified optimal state.
    """
    profile = ch.ConstantRate(gamma)
    model = ch.TensorPower(ch.Dephasing(profile, omega), N)
    rows = []
    for t in time_grid(t_max, steps):
        info = qsl.input_entanglement(model.channel(t), tol=tol)
        rows.append([float(t), info["system"], info["purification"], info["result"].d,
                     info["system_angle"]])
    return Table(["t", "ent_system", "ent_purification", "d", "d_system_input"], rows,
                 {"d", "d_system_input"})


def curve(model, t_max: float, steps: int, t_min: float = 0.0, tol: float = DEFAULT_TOL) -> Table:
    rows = []
    for t in time_grid(t_max, steps, t_min):
        d = qsl.model_distance(model, t, tol)
        rows.append([float(t), math.cos(d), d])
    return Table(["t", "cos_d", "d"], rows, {"d"})


def write_csv(table: Table, stream, degrees: bool = False) -> None:
    """Header plus comma-separated rows, 17 significant digits, LF endings."""
    stream.write(",".join(table.header) + "\n")
    for row in table.rows:
        cells = []
        for name, v in zip(table.header, row):
            if v is None or (isinstance(v, float) and math.isnan(v)):
                cells.append("")
                continue
            if degrees and name in table.angle_columns:
                v = math.degrees(v)
            cells.append(format(float(v), ".17g"))
        stream.write(",".join(cells) + "\n")
