"""Command-line front end: ``qso simulate|cesaro|chain|scramble-scan|zakharevich``.

Exit status: 0 on success, 2 when an input fails validation, 3 on I/O
errors. Every input is read and validated before any computation starts,
and outputs are written atomically, so a failed run leaves no partial file.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import io as qio
from .core import ChainSchedule, SimplexPoint, random_simplex, random_stochastic
from .ergodicity import cesaro_estimate, dyadic_horizons, weak_ergodicity_diagnostic
from .errors import QSOError
from .operators import DOMAINS, MODES, run_trajectory
from .zakharevich import (
    DEFAULT_POINTS,
    ZakharevichExperimentConfig,
    nonergodicity_experiment,
    scramble_scan,
    zakharevich_cubic,
)

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 2, 3
MAX_M = 64


class _Validation(Exception):
    pass


def _fail(msg: str):
    raise _Validation(msg)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_inputs(p: argparse.ArgumentParser, pi: bool = True) -> None:
    p.add_argument("--cubic", metavar="FILE", help="cubic heredity matrix (JSON)")
    p.add_argument("--builtin", choices=["zakharevich"], help="use a built-in cubic matrix")
    if pi:
        p.add_argument("--pi", metavar="FILE",
                       help="interbreeding matrix (JSON) for markov mode, or 'random'")
    p.add_argument("--x0", metavar="a,b,c",
                   help="initial point as comma-separated coordinates (fractions like 1/3 allowed), "
                        "a JSON file, or 'random'")
    p.add_argument("--mode", choices=MODES, default="bernoulli", help="operator form")
    p.add_argument("--domain", choices=DOMAINS, default="linear",
                   help="'log' iterates log-coordinates and cannot underflow")
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized input")


def _add_output(p: argparse.ArgumentParser, formats=("csv", "jsonl"), default="csv") -> None:
    p.add_argument("--out", metavar="FILE", required=True, help="output file, written atomically")
    p.add_argument("--format", choices=formats, default=default, help="output format")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="qso", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="iterate the operator and write the trajectory", formatter_class=fmt)
    _add_inputs(p)
    p.add_argument("--steps", type=int, default=100, help="number of operator applications")
    p.add_argument("--transitions", metavar="FILE", help="also write Q(n) as JSON lines")
    _add_output(p)

    p = sub.add_parser("cesaro", help="Cesaro averages at dyadic checkpoints", formatter_class=fmt)
    _add_inputs(p)
    p.add_argument("--max-k", type=int, default=2**12, help="states averaged at the last checkpoint")
    p.add_argument("--tolerance", type=float, default=0.01,
                   help="convergence heuristic: last 3 dyadic L1 steps below this")
    _add_output(p)

    p = sub.add_parser("chain", help="weak-ergodicity diagnostics of a chain", formatter_class=fmt)
    _add_inputs(p)
    p.add_argument("--chain", metavar="FILE",
                   help="chain as JSON lines {'step','Q'}; otherwise induced by --cubic/--x0")
    p.add_argument("--steps", type=int, default=128, help="chain length when induced from a trajectory")
    p.add_argument("--start", type=int, default=0, help="first index i of Q^{i:j}")
    p.add_argument("--horizons", metavar="J1,J2,...", help="default: dyadic up to the chain length")
    p.add_argument("--threshold", type=float, default=0.0, help="scrambling positivity threshold")
    _add_output(p, default="jsonl")

    p = sub.add_parser("scramble-scan", help="scrambling of Zakharevich Q(x) over a grid of S^2",
                       formatter_class=fmt)
    p.add_argument("--grid", type=int, default=200, help="lattice resolution n (points (a,b,c)/n)")
    p.add_argument("--margin", type=float, default=0.01, help="interior: min coordinate >= margin")
    p.add_argument("--threshold", type=float, default=0.0, help="scrambling positivity threshold")
    _add_output(p, formats=("csv",))

    p = sub.add_parser("zakharevich", help="non-ergodicity experiment for the Zakharevich operator",
                       formatter_class=fmt)
    p.add_argument("--x0", metavar="a,b,c", action="append",
                   help="initial point (repeatable); default: barycenter, (1,0,0), (0.3,0.3,0.4)")
    p.add_argument("--max-k", type=int, default=2**20, help="trajectory length per initial point")
    p.add_argument("--tolerance", type=float, default=0.01, help="Cesaro convergence heuristic tolerance")
    p.add_argument("--grid", type=int, default=200, help="scan lattice resolution")
    p.add_argument("--margin", type=float, default=0.01, help="interior: min coordinate >= margin")
    p.add_argument("--threshold", type=float, default=0.0, help="scrambling positivity threshold")
    p.add_argument("--domain", choices=DOMAINS, default="log",
                   help="'linear' underflows near the boundary and can report spurious convergence")
    p.add_argument("--seed", type=int, default=0, help="seed for --x0 random")
    _add_output(p, formats=("jsonl",), default="jsonl")
    return parser


# --------------------------------------------------------------------------
# input resolution (all validation happens here)
# --------------------------------------------------------------------------

def _load_cubic(args):
    if args.cubic and args.builtin:
        _fail("give either --cubic or --builtin, not both")
    if args.builtin == "zakharevich":
        P = zakharevich_cubic()
    elif args.cubic:
        P = qio.read_cubic(args.cubic)
    else:
        _fail("a cubic matrix is required (--cubic FILE or --builtin zakharevich)")
    if not 1 <= P.m <= MAX_M:
        _fail(f"InvalidDimension: m={P.m} outside 1..{MAX_M}")
    return P


def _parse_point(spec: str, m: int, seed: int) -> SimplexPoint:
    if spec == "random":
        return random_simplex(m, seed)
    if spec.lower().endswith(".json"):
        return qio.read_simplex(spec)
    try:
        vals = [float(Fraction(v.strip())) for v in spec.split(",")]
    except (ValueError, ZeroDivisionError):
        _fail(f"FormatError: cannot parse --x0 {spec!r}")
    return SimplexPoint(vals)


def _load_schedule(args):
    P = _load_cubic(args)
    Pi = None
    if args.mode == "markov":
        if not args.pi:
            _fail("markov mode requires --pi FILE (or --pi random)")
        Pi = random_stochastic(P.m, args.seed + 1) if args.pi == "random" else qio.read_stochastic(args.pi)
    if args.x0 is None:
        _fail("--x0 is required")
    x0 = _parse_point(args.x0, P.m, args.seed)
    if x0.m != P.m or (Pi is not None and Pi.m != P.m):
        _fail(f"DimensionMismatch: cubic matrix has m={P.m}, x0 has m={x0.m}"
              + ("" if Pi is None else f", pi has m={Pi.m}"))
    return ChainSchedule.constant(P, Pi), x0


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    schedule, x0 = _load_schedule(args)
    if args.steps < 0:
        _fail("--steps must be >= 0")
    t0 = time.perf_counter()
    traj = run_trajectory(schedule, x0, args.steps, record_transitions=bool(args.transitions),
                          mode=args.mode, domain=args.domain)
    with qio.atomic_writer(args.out) as fh:
        (qio.write_trajectory_csv if args.format == "csv" else qio.write_trajectory_jsonl)(fh, traj.states)
    if args.transitions:
        with qio.atomic_writer(args.transitions) as fh:
            qio.write_transition_log(fh, traj.transitions)
    print(f"steps: {args.steps}")
    print("final point: " + ",".join(qio.fmt(v) for v in traj.states[-1]))
    print(f"wall time: {time.perf_counter() - t0:.3f} s")
    return EXIT_OK


def cmd_cesaro(args) -> int:
    schedule, x0 = _load_schedule(args)
    if args.max_k < 2 or not args.tolerance > 0:
        _fail("need --max-k >= 2 and --tolerance > 0")
    t0 = time.perf_counter()
    est = cesaro_estimate(schedule, x0, args.max_k, mode=args.mode,
                          tolerance=args.tolerance, domain=args.domain)
    with qio.atomic_writer(args.out) as fh:
        (qio.write_cesaro_csv if args.format == "csv" else qio.write_cesaro_jsonl)(fh, est)
    last = est.checkpoints[-1]
    print("final average (k=%d): %s" % (last[0], ",".join(qio.fmt(v) for v in last[1].coords)))
    print(f"converged_flag: {est.converged_flag} ({est.verdict_rule}, tolerance {args.tolerance})")
    print(f"wall time: {time.perf_counter() - t0:.3f} s")
    return EXIT_OK


def _parse_ints(spec: str) -> list[int]:
    try:
        return [int(v) for v in spec.split(",")]
    except ValueError:
        _fail(f"FormatError: cannot parse integer list {spec!r}")


def cmd_chain(args) -> int:
    if args.chain:
        chain = qio.read_chain(args.chain)
    else:
        schedule, x0 = _load_schedule(args)
        if args.steps < 1:
            _fail("--steps must be >= 1")
        traj = run_trajectory(schedule, x0, args.steps, record_transitions=True,
                              mode=args.mode, domain=args.domain)
        chain = list(traj.transitions)
    horizons = _parse_ints(args.horizons) if args.horizons else \
        [h for h in dyadic_horizons(len(chain)) if h > args.start] or [len(chain)]
    reports = weak_ergodicity_diagnostic(chain, args.start, horizons, threshold=args.threshold)
    with qio.atomic_writer(args.out) as fh:
        (qio.write_reports_csv if args.format == "csv" else qio.write_reports_jsonl)(fh, reports)
    last = reports[-1]
    print(f"horizons: {len(reports)}; dobrushin(Q^{{{last.start_index}:{last.end_index}}}) = {qio.fmt(last.dobrushin)}")
    return EXIT_OK


def cmd_scramble_scan(args) -> int:
    if args.grid < 2 or not 0 < args.margin < 1 / 3:
        _fail("need --grid >= 2 and 0 < --margin < 1/3")
    scan = scramble_scan(args.grid, args.margin, args.threshold)
    with qio.atomic_writer(args.out) as fh:
        qio.write_scan_csv(fh, scan)
    print(", ".join(f"{k}: {v}" for k, v in scan.counts.items()))
    return EXIT_OK


def cmd_zakharevich(args) -> int:
    points = tuple(_parse_point(s, 3, args.seed) for s in args.x0) if args.x0 else DEFAULT_POINTS
    config = ZakharevichExperimentConfig(
        initial_points=points,
        max_steps=args.max_k,
        cesaro_tolerance=args.tolerance,
        scramble_scan_grid=args.grid,
        interior_margin=args.margin,
        domain=args.domain,
        scramble_threshold=args.threshold,
    )
    t0 = time.perf_counter()
    reports = nonergodicity_experiment(config)
    with qio.atomic_writer(args.out) as fh:
        qio.write_experiment_jsonl(fh, reports)
    for r in reports:
        x = ",".join(f"{v:.6g}" for v in r.initial_point.coords)
        d = r.chain[-1].dobrushin if r.chain else float("nan")
        print(f"x0=({x}): cesaro converged_flag={r.cesaro.converged_flag}, "
              f"dobrushin(Q^{{0:{config.max_steps}}})={d:.6g}")
    print(f"wall time: {time.perf_counter() - t0:.3f} s")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "cesaro": cmd_cesaro,
    "chain": cmd_chain,
    "scramble-scan": cmd_scramble_scan,
    "zakharevich": cmd_zakharevich,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Validation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QSOError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
