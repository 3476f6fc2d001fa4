"""Command-line front end: ``cvteleport {sweep,separability,optimize,montecarlo}``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import (
    ChannelParams,
    channel_moments,
    channel_state,
    is_separable,
    separability_threshold,
)
from .gaussian import DegenerateMeasurementError
from .optimize import OptimumResult, optimal_gain, optimal_receiver_transmittance, optimal_squeezing
from .teleport import ProtocolConfig, UnphysicalMomentsError, mc_fidelity, protocol_fidelity

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SEED_ENV = "CVTELEPORT_SEED"
SWEEP_VARS = ("s", "R_a", "R_b", "n_bar_a", "n_bar_b")
CSV_HEADER = ["sweep_value", "m_a", "m_b", "c_a", "c_b", "separable", "fidelity_analytic", "fidelity_mc", "mc_stderr"]

# config-file key -> value parser
_CONFIG_KEYS = {
    "s": float,
    "R_a": float,
    "R_b": float,
    "n_bar_a": float,
    "n_bar_b": float,
    "var": str,
    "range": str,
    "gain": float,
    "sender_transmittance": float,
    "displacement_transmittance": float,
    "alpha_re": float,
    "alpha_im": float,
    "mc": int,
    "seed": int,
    "workers": int,
}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _num(x):
    if isinstance(x, (float, np.floating)):
        return float(fmt(x)) if math.isfinite(x) else str(x)
    return x


@dataclass
class SweepSpec:
    channel: dict = field(default_factory=lambda: {"s": 0.0, "R_a": 0.0, "R_b": 0.0, "n_bar_a": 0.0, "n_bar_b": 0.0})
    var: str = "s"
    start: float = 0.0
    stop: float = 5.0
    steps: int = 101
    protocol: dict = field(default_factory=lambda: {"gain": 1.0, "sender_transmittance": 1.0, "displacement_transmittance": 1.0})
    alpha: complex = 0j
    mc: int | None = None
    seed: int = 0
    workers: int = 1

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def params_at(self, value: float) -> ChannelParams:
        return ChannelParams(**{**self.channel, self.var: float(value)})

    def config(self) -> ProtocolConfig:
        return ProtocolConfig(**self.protocol)


def parse_range(text: str, key: str = "range") -> tuple[float, float, int]:
    try:
        start, stop, steps = text.split(":")
        return float(start), float(stop), int(steps)
    except ValueError:
        raise UsageError(f"{key}: expected start:stop:steps, got {text!r}") from None


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config not found: {path}")
    values = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _check_ranges(values: dict) -> None:
    for key in ("R_a", "R_b", "sender_transmittance", "displacement_transmittance"):
        if key in values and not 0.0 <= values[key] <= 1.0:
            raise UsageError(f"{key} out of range [0, 1]: {values[key]}")
    for key in ("sender_transmittance", "displacement_transmittance"):
        if key in values and values[key] == 0.0:
            raise UsageError(f"{key} must be positive")
    for key in ("s", "n_bar_a", "n_bar_b", "gain"):
        if key in values and values[key] < 0:
            raise UsageError(f"{key} must be non-negative: {values[key]}")
    if values.get("mc") is not None and values["mc"] < 1000:
        raise UsageError(f"mc must be at least 1000: {values['mc']}")
    if values.get("workers", 1) < 1:
        raise UsageError("workers must be at least 1")


def parse_config(args: argparse.Namespace) -> SweepSpec:
    """Merge the config file (if any) with command-line flags; flags win."""
    values = read_config(args.config) if args.config else {}
    flag_map = {
        "s": args.s,
        "R_a": args.ra,
        "R_b": args.rb,
        "n_bar_a": args.na,
        "n_bar_b": args.nb,
        "var": args.var,
        "range": args.range,
        "gain": args.gain,
        "sender_transmittance": args.eta,
        "displacement_transmittance": args.tdisp,
        "alpha_re": args.alpha_re,
        "alpha_im": args.alpha_im,
        "mc": args.mc,
        "seed": args.seed,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    _check_ranges(values)

    spec = SweepSpec(seed=values.get("seed", default_seed()))
    spec.channel.update({k: values[k] for k in SWEEP_VARS if k in values})
    spec.protocol.update({k: values[k] for k in spec.protocol if k in values})
    spec.alpha = complex(values.get("alpha_re", 0.0), values.get("alpha_im", 0.0))
    spec.mc = values.get("mc")
    spec.workers = values.get("workers", 1)
    spec.var = values.get("var", "s")
    if spec.var not in SWEEP_VARS:
        raise UsageError(f"var must be one of {', '.join(SWEEP_VARS)}, got {spec.var!r}")
    if "range" in values:
        spec.start, spec.stop, spec.steps = parse_range(values["range"])
    if spec.steps < 2:
        raise UsageError(f"range: steps must be at least 2, got {spec.steps}")
    if not spec.start < spec.stop:
        raise UsageError(f"range: start must be below stop, got {spec.start}:{spec.stop}")
    _check_ranges({spec.var: spec.start})
    _check_ranges({spec.var: spec.stop})
    return spec


def run_sweep(spec: SweepSpec, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    config = spec.config()
    for value in spec.values():
        params = spec.params_at(value)
        mom = channel_moments(params)
        state = channel_state(params)
        row = [value, mom.m_a, mom.m_b, mom.c_a, mom.c_b]
        sep = "1" if is_separable(mom).separable else "0"
        if spec.mc:
            report = mc_fidelity(state, spec.alpha, config, spec.mc, spec.seed, spec.workers)
            tail = [report.analytic, report.mc_estimate, report.mc_stderr]
            cells = [fmt(x) for x in row] + [sep] + [fmt(x) for x in tail]
        else:
            analytic = protocol_fidelity(state, spec.alpha, config)
            cells = [fmt(x) for x in row] + [sep, fmt(analytic), "", ""]
        writer.writerow(cells)


def run_separability(params: ChannelParams) -> dict:
    mom = channel_moments(params)
    verdict = is_separable(mom)
    threshold = separability_threshold(params, closed_form=True)
    return {
        "params": {k: _num(getattr(params, k)) for k in SWEEP_VARS},
        "moments": {k: _num(getattr(mom, k)) for k in ("m_a", "m_b", "c_a", "c_b")},
        "margin": _num(verdict.margin),
        "separable": verdict.separable,
        "threshold_R_a": None if threshold is None else _num(threshold),
        "threshold_method": "closed-form" if params.n_bar_b == 0 else "bisection",
    }


def optimum_json(mode: str, result: OptimumResult) -> dict:
    return {
        "mode": mode,
        "argument": "unbounded" if result.unbounded else _num(result.argument),
        "value": _num(result.value),
        "method": result.method,
        "bracket": None if result.bracket is None else [_num(x) for x in result.bracket],
    }


def run_optimize(args: argparse.Namespace) -> dict:
    def need(*names):
        missing = [n for n in names if getattr(args, n) is None]
        if missing:
            raise UsageError(f"optimize --mode {args.mode} requires " + ", ".join("--" + n for n in missing))

    if args.mode == "squeezing":
        need("ta", "tb")
        result = optimal_squeezing(args.ta, args.tb, args.na or 0.0, args.nb or 0.0)
    elif args.mode == "receiver":
        need("s", "ta", "na")
        result = optimal_receiver_transmittance(args.s, args.ta, args.na)
    else:
        need("s", "ta")
        result = optimal_gain(args.s, args.ta)
    return optimum_json(args.mode, result)


def run_montecarlo(args: argparse.Namespace) -> dict:
    spec = parse_config(args)
    params = spec.params_at(spec.channel[spec.var])
    n = spec.mc or 200_000
    report = mc_fidelity(channel_state(params), spec.alpha, spec.config(), n, spec.seed, spec.workers)
    return {
        "params": {k: _num(getattr(params, k)) for k in SWEEP_VARS},
        "protocol": {k: _num(v) for k, v in spec.protocol.items()},
        "alpha": [_num(spec.alpha.real), _num(spec.alpha.imag)],
        "analytic": _num(report.analytic),
        "mc_estimate": _num(report.mc_estimate),
        "mc_stderr": _num(report.mc_stderr),
        "n_samples": report.n_samples,
        "seed": report.seed,
    }


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s", type=float, help="initial squeezing")
    p.add_argument("--ra", type=float, help="normalized interaction time of arm a")
    p.add_argument("--rb", type=float, help="normalized interaction time of arm b")
    p.add_argument("--na", type=float, help="thermal photons of bath a")
    p.add_argument("--nb", type=float, help="thermal photons of bath b")


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--gain", type=float)
    p.add_argument("--eta", type=float, help="sender detector transmittance")
    p.add_argument("--tdisp", type=float, help="receiver displacement beam-splitter transmittance")
    p.add_argument("--alpha-re", type=float, dest="alpha_re")
    p.add_argument("--alpha-im", type=float, dest="alpha_im")
    p.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="sweep one channel parameter and write CSV")
    _add_channel_flags(sweep)
    _add_protocol_flags(sweep)
    sweep.add_argument("--var", choices=SWEEP_VARS)
    sweep.add_argument("--range", help="start:stop:steps")
    sweep.add_argument("--s-range", dest="s_range", help="shorthand for --var s --range start:stop:steps")
    sweep.add_argument("--mc", type=int, help="Monte-Carlo samples per row")
    sweep.add_argument("--out", help="CSV path (default stdout)")

    sep = sub.add_parser("separability", help="separability verdict and threshold as JSON")
    _add_channel_flags(sep)

    opt = sub.add_parser("optimize", help="optimal squeezing, receiver transmittance or gain as JSON")
    opt.add_argument("--mode", choices=("squeezing", "receiver", "gain"), required=True)
    opt.add_argument("--s", type=float)
    opt.add_argument("--ta", type=float, help="transmittance of arm a")
    opt.add_argument("--tb", type=float, help="transmittance of arm b")
    opt.add_argument("--na", type=float)
    opt.add_argument("--nb", type=float)

    mc = sub.add_parser("montecarlo", help="Monte-Carlo fidelity at one parameter point as JSON")
    _add_channel_flags(mc)
    _add_protocol_flags(mc)
    mc.add_argument("--n", type=int, dest="mc", help="number of samples (default 200000)")
    mc.set_defaults(var=None, range=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            if args.s_range is not None:
                args.var, args.range = "s", args.s_range
            spec = parse_config(args)
            if args.out:
                with open(args.out, "w", newline="") as fh:
                    run_sweep(spec, fh)
            else:
                run_sweep(spec, sys.stdout)
            return EXIT_OK
        if args.command == "separability":
            params = ChannelParams(args.s or 0.0, args.ra or 0.0, args.rb or 0.0, args.na or 0.0, args.nb or 0.0)
            report = run_separability(params)
        elif args.command == "optimize":
            report = run_optimize(args)
        else:
            report = run_montecarlo(args)
        print(json.dumps(report, indent=2))
        return EXIT_OK
    except (UnphysicalMomentsError, DegenerateMeasurementError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"cvteleport: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"cvteleport: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
