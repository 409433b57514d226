"""``qsl`` command line: distances, curves, figure data, minimum times, verification."""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import channels as ch
from . import figures, oracle, qsl
from .sdp import DEFAULT_TOL

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2, 3
ORACLE_THRESHOLD = 1e-6

log = logging.getLogger("noisyqsl")


class InputError(ValueError):
    """Bad flags or files; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    gamma: float = 0.1
    omega: float = 1.0
    t_min: float = 0.0
    t_max: Optional[float] = None
    steps: Optional[int] = None
    N: Optional[int] = None
    ratio_min: float = 0.1
    ratio_max: float = 10.0
    ratios: int = 25
    tol: float = DEFAULT_TOL
    seed: int = 0
    samples: int = 10_000
    w_samples: int = 1000
    out: Optional[str] = None
    fmt: str = "json"
    degrees: bool = False

    def __post_init__(self):
        if self.steps is not None and self.steps < 2:
            raise InputError("--steps must be >= 2")
        if self.t_min < 0 or (self.t_max is not None and self.t_max <= self.t_min):
            raise InputError("need 0 <= t-min < t-max")
        if self.N is not None and not (1 <= self.N and 2 ** self.N <= ch.MAX_TENSOR_DIM):
            raise InputError(f"--n must be in 1..{int(math.log2(ch.MAX_TENSOR_DIM))} "
                             "(dimension budget 2^N <= 64); lower --n")
        if not 0 < self.ratio_min < self.ratio_max:
            raise InputError("need 0 < ratio-min < ratio-max")
        if self.tol <= 0 or self.samples < 1 or self.w_samples < 1:
            raise InputError("--tol, --samples and --w-samples must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in vars(args).items() if k in names and v is not None})


# ---------------------------------------------------------------------------
# serialization helpers

def _complex_json(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return ch.matrix_to_json(a)


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


@contextlib.contextmanager
def _open_out(out: Optional[str]):
    if out:
        with open(out, "w", newline="\n") as fh:
            yield fh
    else:
        yield sys.stdout


def _report_json(rep: oracle.OracleReport) -> dict:
    return {
        "samples": rep.samples,
        "seed": rep.seed,
        "best_value": rep.best_value,
        "violation": rep.violation,
        "exact_cos": rep.reference_cos,
        "passed": bool(rep.passed),
        "witness": _complex_json(rep.witness),
    }


def _load(path) -> ch.KrausChannel:
    try:
        return ch.load_channel(path)
    except ch.ChannelError as exc:
        raise InputError(str(exc)) from exc


def _load_matrix(path) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("H", data.get("matrix"))
    try:
        m = ch.matrix_from_json(data)
    except (ch.ChannelError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if m.shape[0] != m.shape[1] or not np.allclose(m, m.conj().T, atol=1e-10):
        raise InputError(f"{path}: Hamiltonian must be a square Hermitian matrix")
    return m


def _profile(args) -> ch.DecayProfile:
    if getattr(args, "rate_table", None):
        try:
            t, r = np.loadtxt(args.rate_table, delimiter=",", unpack=True, ndmin=2)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read rate table: {exc}") from exc
        return ch.TabulatedRate(tuple(t), tuple(r))
    return ch.ConstantRate(args.gamma)


def _model(args):
    kind = args.model
    if kind == "ad":
        m = ch.AmplitudeDamping(_profile(args))
    elif kind == "dephasing":
        m = ch.Dephasing(_profile(args), args.omega)
    elif kind == "unitary":
        if not args.hamiltonian:
            raise InputError("--model unitary needs --hamiltonian H.json")
        m = ch.Unitary(_load_matrix(args.hamiltonian))
    elif kind == "custom":
        if not args.channel:
            raise InputError("--model custom needs --channel C.json")
        m = ch.Custom(_load(args.channel))
    else:
        raise InputError(f"unknown model {kind!r}")
    if args.n and args.n > 1:
        m = ch.TensorPower(m, args.n)
    return m


def _distance_json(res: qsl.QslResult) -> dict:
    sol = res.solution
    return {
        "cos_d": res.cos_d,
        "d": res.d,
        "gap": res.gap,
        "residuals": {k: float(v) for k, v in sol.residuals.items()},
        "iterations": sol.iterations,
        "converged": bool(sol.converged),
        "W": ch.matrix_to_json(res.W_opt),
        "rho_S": ch.matrix_to_json(sol.rho_opt),
        "optimal_input": None if res.optimal_input is None else _complex_json(res.optimal_input),
        "ancilla_dim": res.ancilla_dim,
        "achieved_angle": res.achieved_angle,
        "certified": bool(res.certified),
    }


def _oracles(a: ch.KrausChannel, b: ch.KrausChannel, cos_d: float, cfg: RunConfig,
             inject=()) -> tuple[oracle.OracleReport, oracle.OracleReport]:
    identity_ref = a == ch.identity_channel(a.dim)
    fid = oracle.random_state_min_fidelity(b, samples=cfg.samples, seed=cfg.seed, exact_cos=cos_d,
                                           reference=None if identity_ref else a)
    wmax = oracle.random_w_max(a, b, samples=cfg.w_samples, seed=cfg.seed, exact_cos=cos_d,
                               inject=inject)
    return fid, wmax


# ---------------------------------------------------------------------------
# commands

def cmd_distance(args, cfg: RunConfig) -> int:
    a, b = _load(args.a), _load(args.b)
    if a.dim != b.dim:
        raise InputError(f"channel dimensions differ: {a.dim} vs {b.dim}")
    res = qsl.channel_distance(a, b, tol=cfg.tol)
    out = _distance_json(res)
    code = EXIT_OK if res.certified else EXIT_NONCONVERGED
    if args.verify:
        fid, wmax = _oracles(a, b, res.cos_d, cfg)
        out["oracle"] = {"min_fidelity": _report_json(fid), "w_max": _report_json(wmax)}
        if code == EXIT_OK and not (fid.violation <= ORACLE_THRESHOLD
                                    and wmax.violation <= ORACLE_THRESHOLD):
            code = EXIT_FAIL
    _emit(out, cfg.out)
    return code


def cmd_verify(args, cfg: RunConfig) -> int:
    b = _load(args.channel)
    a = _load(args.reference) if args.reference else ch.identity_channel(b.dim)
    if a.dim != b.dim:
        raise InputError("reference and channel dimensions differ")
    res = qsl.channel_distance(a, b, tol=cfg.tol)
    inject = []
    if args.reference is None:
        w = qsl.alpha_contraction(b)
        if w is not None:
            inject.append(w)
    fid, wmax = _oracles(a, b, res.cos_d, cfg, inject=inject)
    ok = fid.violation <= ORACLE_THRESHOLD and wmax.violation <= ORACLE_THRESHOLD
    _emit({
        "cos_d": res.cos_d,
        "d": res.d,
        "certified": bool(res.certified),
        "min_fidelity": _report_json(fid),
        "w_max": _report_json(wmax),
        "passed": bool(ok),
    }, cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_mintime(args, cfg: RunConfig) -> int:
    model = _model(args)
    r = qsl.min_time(model, args.theta, t_max=args.t_max or 50.0, step=args.step, tol=cfg.tol)
    theta = math.degrees(r.theta) if cfg.degrees else r.theta
    _emit({
        "theta": theta,
        "reachable": r.reachable,
        "time": r.time,
        "method": r.method,
        "reason": r.reason,
        "alpha_min": r.alpha_min,
    }, cfg.out)
    return EXIT_OK


def cmd_curve(args, cfg: RunConfig) -> int:
    model = _model(args)
    table = figures.curve(model, cfg.t_max or 10.0, cfg.steps or 101, cfg.t_min, cfg.tol)
    with _open_out(cfg.out) as fh:
        figures.write_csv(table, fh, cfg.degrees)
    return EXIT_OK


def cmd_figure(args, cfg: RunConfig) -> int:
    n = args.number
    kw = {"gamma": cfg.gamma}
    if n == 1:
        table = figures.figure1(omega=cfg.omega, t_max=cfg.t_max or 4 * math.pi,
                                steps=cfg.steps or 201, sdp=args.sdp, tol=cfg.tol, **kw)
    elif n == 2:
        table = figures.figure2(N=cfg.N or 5, ratio_min=cfg.ratio_min, ratio_max=cfg.ratio_max,
                                ratios=cfg.ratios, steps=cfg.steps or 400,
                                exact_steps=args.exact_steps, force_exact=args.force_exact,
                                t_window=cfg.t_max, tol=cfg.tol, **kw)
    else:
        fn = figures.figure3 if n == 3 else figures.figure4
        table = fn(omega=cfg.omega, N=cfg.N or 2, t_max=cfg.t_max or 10.0,
                   steps=cfg.steps or 101, tol=cfg.tol, **kw)
    with _open_out(cfg.out) as fh:
        figures.write_csv(table, fh, cfg.degrees)
    return EXIT_OK


def cmd_channel(args, cfg: RunConfig) -> int:
    """Write a channel file from a built-in model."""
    if args.model == "identity":
        c = ch.identity_channel(args.dim)
    elif args.model == "random":
        c = ch.random_channel(args.dim, args.num_kraus,
                              np.random.Generator(np.random.Philox(cfg.seed)))
    else:
        c = _model(args).channel(args.t)
    _emit(ch.channel_to_dict(c), cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _model_flags(p: argparse.ArgumentParser, models) -> None:
    p.add_argument("--model", choices=models, required=True)
    p.add_argument("--gamma", type=float, default=0.1, help="constant decay rate")
    p.add_argument("--rate-table", help="CSV of t,gamma(t) rows starting at t=0")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--hamiltonian", help="JSON matrix file for --model unitary")
    p.add_argument("--channel", help="channel JSON for --model custom")
    p.add_argument("--n", type=int, dest="n", default=1, help="number of copies (tensor power)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output file (default stdout)"):
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--degrees", action="store_true", help="emit angles in degrees")

    d = sub.add_parser("distance", help="maximal angle between two channels")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--verify", action="store_true", help="also run both sampling oracles")
    d.add_argument("--samples", type=int, default=10_000)
    d.add_argument("--w-samples", type=int, default=1000)
    d.add_argument("--seed", type=int, default=0)
    common(d)

    v = sub.add_parser("verify", help="sampling oracles against the exact distance")
    v.add_argument("--channel", required=True)
    v.add_argument("--reference", help="compare against this channel instead of the identity")
    v.add_argument("--samples", type=int, default=10_000)
    v.add_argument("--w-samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    common(v)

    m = sub.add_parser("mintime", help="first time the maximal angle reaches theta")
    _model_flags(m, ["ad", "dephasing", "unitary", "custom"])
    m.add_argument("--theta", type=float, required=True, help="target angle in radians")
    m.add_argument("--t-max", type=float, default=50.0)
    m.add_argument("--step", type=float, default=0.01)
    common(m)

    c = sub.add_parser("curve", help="d(I, K_t) on a time grid, as CSV")
    _model_flags(c, ["ad", "dephasing", "unitary", "custom"])
    c.add_argument("--t-min", type=float, default=0.0)
    c.add_argument("--t-max", type=float, default=10.0)
    c.add_argument("--steps", type=int, default=101)
    common(c)

    f = sub.add_parser("figure", help="data series for figures 1-4, as CSV")
    f.add_argument("number", type=int, choices=[1, 2, 3, 4])
    f.add_argument("--gamma", type=float, default=0.1)
    f.add_argument("--omega", type=float, default=1.0)
    f.add_argument("--n", type=int, dest="N")
    f.add_argument("--t-max", type=float, help="time range (figure 2: t-search window)")
    f.add_argument("--steps", type=int)
    f.add_argument("--ratio-min", type=float, default=0.1)
    f.add_argument("--ratio-max", type=float, default=10.0)
    f.add_argument("--ratios", type=int, default=25)
    f.add_argument("--exact-steps", type=int, default=40)
    f.add_argument("--force-exact", action="store_true")
    f.add_argument("--sdp", action="store_true", help="figure 1: add SDP columns")
    common(f)

    k = sub.add_parser("channel", help="write a channel JSON file")
    _model_flags(k, ["ad", "dephasing", "unitary", "identity", "random"])
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--dim", type=int, default=2)
    k.add_argument("--num-kraus", type=int, default=2)
    k.add_argument("--seed", type=int, default=0)
    common(k)
    return p


COMMANDS = {
    "distance": cmd_distance,
    "verify": cmd_verify,
    "mintime": cmd_mintime,
    "curve": cmd_curve,
    "figure": cmd_figure,
    "channel": cmd_channel,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
        if args.command == "channel" and getattr(args, "n", 1) > 1:
            cfg.N = args.n
        return COMMANDS[args.command](args, cfg)
    except (InputError, ch.ChannelError, ValueError) as exc:
        print(f"qsl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
