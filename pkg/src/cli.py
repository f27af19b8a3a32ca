"""
cli.py

Command-line front end.

  simulate      sample E(xi, t) and write it (csv | json | bin)
  peaks         list the peaks of E(xi, t_index), from a saved field or a fresh run
  combtone      predict the combination tone of an interval u/w, optionally verify it
  table1        regenerate the table of natural intervals
  oracle-check  closed forms vs RK4 on seeded random tuples
  params        derived constants, band and damping crossovers of a parameter set
  response      R_n / phi_n over a xi grid for one drive frequency
  trajectory    RK4 run of one mode from rest, written as t,p,v CSV

Exit codes: 0 ok, 1 oracle failure, 2 configuration or domain error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional, Sequence, Tuple

from src.combtone import format_table1_csv, format_table1_text, interval_from_fraction, predict, table1, verify_period
from src.config import DEFAULT_PARAMS, N_MAX, SEED, T_SAMPLES, WORKERS, XI_POINTS
from src.energy import log_xi_grid
from src.errors import ConfigError, DomainError, NotGenuineSoundError, NumericError
from src.formats import FORMATS, format_response_csv, format_trajectory_csv, write_text
from src.graph import run_pipeline
from src.graph_state import RunConfig
from src.modal import amplitude_profile
from src.oracle import OscillatorState, adaptive_steps_per_period, fastest_frequency, integrate_oscillator, oracle_check
from src.params import (
    assumptions,
    band_hz,
    builtin_parameter_sets,
    damping_crossover,
    derive,
    mode_coefficients,
    resolve_params,
    save_params_file,
)
from src.peaks import note_name
from src.signals import parse_signal_spec, two_tone

TWO_PI = 2.0 * math.pi


def _modes(text: str) -> Tuple[int, ...]:
    try:
        modes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"modes must be a comma list of odd integers, got {text!r}")
    if not modes or any(n < 1 or n % 2 == 0 for n in modes):
        raise argparse.ArgumentTypeError(f"modes must be odd integers >= 1, got {text!r}")
    return modes


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text!r}")
    return value


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", default=DEFAULT_PARAMS, help="builtin parameter set id or params file path")
    p.add_argument("--signal", default="sine:262", help="sine:F[:A[:PHI]] | sawtooth:F[:N] | twotone:F:U/W | wav:PATH | json:PATH")
    p.add_argument("--f-lo", type=float, default=None, help="lowest string frequency, Hz (default: band edge)")
    p.add_argument("--f-hi", type=float, default=None, help="highest string frequency, Hz (default: band edge)")
    p.add_argument("--points", type=_positive_int, default=XI_POINTS, help="xi grid points")
    p.add_argument("--t-samples", type=_positive_int, default=T_SAMPLES, help="samples over one energy period")
    p.add_argument("--n-max", type=_positive_int, default=N_MAX, help="highest mode index kept")
    p.add_argument("--modes", type=_modes, default=None, help="comma list of odd modes summed into the field, e.g. 1,3")
    p.add_argument("--workers", type=_positive_int, default=WORKERS, help="worker hint for grid evaluation")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="print run logs to stderr")

    parser = argparse.ArgumentParser(prog="basilar", description="Basilar-membrane string bank simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="sample E(xi, t) and write it")
    _add_grid_args(p)
    p.add_argument("--format", dest="fmt", choices=FORMATS, default=None, help="output format (default: from --out suffix)")
    p.add_argument("--out", default=None, help="output path (default: CSV to stdout)")
    p.add_argument("--no-per-mode", action="store_true", help="write only the total (n = 0 rows)")

    p = sub.add_parser("peaks", parents=[common], help="list peaks of E(xi, t_index)")
    _add_grid_args(p)
    p.add_argument("--field", default=None, help="saved field (csv | json | bin) instead of simulating")
    p.add_argument("--fundamental", type=float, default=None, help="reference fundamental, Hz (default: from the signal)")
    p.add_argument("--t-index", type=int, default=0)
    p.add_argument("--min-prominence", type=float, default=1e-3, help="relative to the largest value")
    p.add_argument("--tolerance-cents", type=float, default=15.0)
    p.add_argument("--out", default=None, help="also write the peaks as CSV")

    p = sub.add_parser("combtone", parents=[common], help="combination tone of the interval u/w")
    p.add_argument("u", type=int)
    p.add_argument("w", type=int)
    p.add_argument("k0_hz", type=float, help="lower tone, Hz")
    p.add_argument("--verify", action="store_true", help="check the energy period numerically")
    p.add_argument("--xi", type=float, default=None, help="string frequency for --verify, Hz (default: k0)")
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.add_argument("--n-max", type=_positive_int, default=N_MAX)

    p = sub.add_parser("table1", parents=[common], help="table of natural intervals")
    p.add_argument("--base", default="C4", help="note of the lower tone")
    p.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("oracle-check", parents=[common], help="closed forms vs RK4")
    p.add_argument("--params", default="all", help="parameter set id or file, or 'all' for every builtin set")
    p.add_argument("--tuples", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=SEED)
    p.add_argument("--workers", type=_positive_int, default=WORKERS)
    p.add_argument("--out", default=None, help="write the JSON report here")

    p = sub.add_parser("params", parents=[common], help="derived constants of a parameter set")
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.add_argument("--save", default=None, help="write the set as a params file")

    p = sub.add_parser("response", parents=[common], help="R_n and phi_n over the xi grid")
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.add_argument("--k", type=float, required=True, help="drive frequency, Hz")
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--f-lo", type=float, default=None)
    p.add_argument("--f-hi", type=float, default=None)
    p.add_argument("--points", type=_positive_int, default=XI_POINTS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("trajectory", parents=[common], help="RK4 run of one mode from rest")
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.add_argument("--signal", default="sine:262")
    p.add_argument("--xi", type=float, required=True, help="string frequency, Hz")
    p.add_argument("--n", type=_modes, default=(1,), help="odd mode index")
    p.add_argument("--periods", type=_positive_int, default=20, help="length in periods of the fastest frequency")
    p.add_argument("--every", type=_positive_int, default=1, help="keep every Nth step")
    p.add_argument("--out", default=None)

    return parser


# ---------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------


def _grid_config(args: argparse.Namespace, **extra) -> RunConfig:
    return RunConfig(
        params=args.params,
        signal=args.signal,
        f_lo_hz=args.f_lo,
        f_hi_hz=args.f_hi,
        xi_points=args.points,
        t_samples=args.t_samples,
        n_max=args.n_max,
        modes=args.modes,
        workers=args.workers,
        **extra,
    )


def cmd_simulate(args: argparse.Namespace, logs: List[str]) -> int:
    config = _grid_config(args, fmt=args.fmt, out=args.out, keep_modes=not args.no_per_mode)
    state = run_pipeline("simulate", config)
    logs.extend(state.get("logs", []))
    sys.stdout.write(state.get("output_text", ""))
    return 0


def cmd_peaks(args: argparse.Namespace, logs: List[str]) -> int:
    config = _grid_config(
        args,
        out=args.out,
        field_path=args.field,
        fundamental_hz=args.fundamental,
        t_index=args.t_index,
        min_prominence=args.min_prominence,
        tolerance_cents=args.tolerance_cents,
    )
    state = run_pipeline("peaks", config)
    logs.extend(state.get("logs", []))
    sys.stdout.write(state.get("output_text", ""))
    return 0


def cmd_combtone(args: argparse.Namespace, logs: List[str]) -> int:
    interval = interval_from_fraction(args.u, args.w)
    if interval.reduced:
        print(f"warning: {args.u}/{args.w} is not in lowest terms; using {interval.u}/{interval.w}", file=sys.stderr)
    k0 = TWO_PI * args.k0_hz
    pred = predict(interval, k0)

    lines = [
        f"interval {interval.u}/{interval.w}: (u+w)/(u-w) = {interval.p}/{interval.q}",
        f"f0 = {args.k0_hz:.3f} Hz, f1 = {args.k0_hz * interval.u / interval.w:.3f} Hz",
    ]
    for which, label in (("helmholtz", "difference tone"), ("lagrange", "GCD tone"), ("ours", "energy oscillation")):
        hz = pred.angular(which) / TWO_PI
        lines.append(f"{label:<20} {str(getattr(pred, which)):>6} k0  {hz:10.3f} Hz  {note_name(hz).label}")
    sys.stdout.write("\n".join(lines) + "\n")

    if args.verify:
        params = resolve_params(args.params)
        xi = TWO_PI * (args.xi if args.xi is not None else args.k0_hz)
        report = verify_period(params, two_tone(args.k0_hz, interval.u, interval.w), interval, xi, args.n_max)
        logs.extend(report.logs)
        sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
        return 0 if report.passed else 1
    return 0


def cmd_table1(args: argparse.Namespace, logs: List[str]) -> int:
    rows = table1(args.base)
    text = format_table1_csv(rows) if args.fmt == "csv" else format_table1_text(rows)
    if args.out:
        path = write_text(args.out, text)
        logs.append(f"[table1] -> {path}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle_check(args: argparse.Namespace, logs: List[str]) -> int:
    sets = list(builtin_parameter_sets().values()) if args.params == "all" else [resolve_params(args.params)]
    reports = [oracle_check(p, n_tuples=args.tuples, seed=args.seed, workers=args.workers) for p in sets]
    for report in reports:
        logs.extend(report.logs)
        ok = sum(t.passed for t in report.tuples)
        print(
            f"{report.params}: {ok}/{len(report.tuples)} within {report.tolerance:g} "
            f"(worst {report.worst:.2e}), seed {report.seed}"
        )
    if args.out:
        write_text(args.out, json.dumps([r.to_json() for r in reports], indent=2) + "\n")
    return 0 if all(r.passed for r in reports) else 1


def cmd_params(args: argparse.Namespace, logs: List[str]) -> int:
    params = resolve_params(args.params)
    d = derive(params)
    lo, hi = band_hz(params)
    lines = [f"name        {params.name}"]
    lines += [f"{key:<11} {getattr(params, key)!r}" for key in ("A_rho", "k_rho", "A_T", "k_T", "A_gamma", "k_gamma", "ell", "L", "c")]
    lines += [
        f"A_tilde     {d.A_tilde:.6g}",
        f"k_tilde     {d.k_tilde:.6g}",
        f"alpha       {d.alpha:.6g}",
        f"B_mu        {d.B_mu:.6g}",
        f"B_T         {d.B_T:.6g}",
        f"B_nu        {d.B_nu:.6g}",
        f"band        [{lo:.2f}, {hi:.2f}] Hz",
        f"assumptions {', '.join(sorted(assumptions(params))) or 'none'}",
    ]
    if d.alpha < 1.0:
        lines.append(f"xi = mu/2    {damping_crossover(params, 1, 0.5) / TWO_PI:.2f} Hz (mode 1 over/underdamped)")
        lines.append(f"xi = mu      {damping_crossover(params, 1, 1.0) / TWO_PI:.2f} Hz")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.save:
        path = save_params_file(params, args.save)
        logs.append(f"[params] saved -> {path}")
    return 0


def cmd_response(args: argparse.Namespace, logs: List[str]) -> int:
    params = resolve_params(args.params)
    xi = log_xi_grid(params, args.points, args.f_lo, args.f_hi)
    R, phi = amplitude_profile(params, TWO_PI * args.k, args.n, xi)
    text = format_response_csv(xi, R, phi, args.n)
    if args.out:
        path = write_text(args.out, text)
        logs.append(f"[response] {xi.size} points -> {path}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_trajectory(args: argparse.Namespace, logs: List[str]) -> int:
    if len(args.n) != 1:
        raise ConfigError(f"--n takes a single mode, got {args.n}")
    params = resolve_params(args.params)
    forcing = parse_signal_spec(args.signal)
    coeffs = mode_coefficients(params, TWO_PI * args.xi, args.n[0])
    omega = fastest_frequency(coeffs, forcing)
    dt = TWO_PI / omega / adaptive_steps_per_period(coeffs, forcing)
    t_end = args.periods * TWO_PI / omega
    traj = integrate_oscillator(coeffs, forcing, OscillatorState(0.0, 0.0), t_end, dt, record_every=args.every)
    text = format_trajectory_csv(traj)
    if args.out:
        path = write_text(args.out, text)
        logs.append(f"[trajectory] {traj.t.size} rows, step {traj.step:.3e} s -> {path}")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "peaks": cmd_peaks,
    "combtone": cmd_combtone,
    "table1": cmd_table1,
    "oracle-check": cmd_oracle_check,
    "params": cmd_params,
    "response": cmd_response,
    "trajectory": cmd_trajectory,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logs: List[str] = []
    try:
        code = COMMANDS[args.command](args, logs)
    except (ConfigError, DomainError, NotGenuineSoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = 2
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        code = 3
    if args.verbose:
        for line in logs:
            print(line, file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
