"""Command-line entry point: ``rangeloc generate | localize | verify-signs``.

Reports are ``key=value`` lines on stdout; values containing spaces are
shell-quoted so ``shlex.split`` recovers them.

Exit codes: 0 ok, 1 usage, 2 generation failure, 3 I/O or unreadable
scenario, 4 sign resolution, 5 gain design or singular system, 6 divergence,
7 sign verification mismatch.
"""
from __future__ import annotations

import argparse
import csv
import shlex
import sys

import numpy as np

from .errors import (
    DesignFailure,
    Diverged,
    GenerationFailure,
    NotSchur,
    ParseError,
    SignResolutionError,
    SingularSystem,
)
from .geometry import areal_from_coordinates
from .pipeline import localize
from .scenario import GenerationConfig, Scenario, generate, load, save
from .signs import resolve_with_branch
from .solver import MAX_ITER

EXIT_OK, EXIT_USAGE, EXIT_GENERATE, EXIT_IO = 0, 1, 2, 3
EXIT_SIGNS, EXIT_DESIGN, EXIT_DIVERGED, EXIT_MISMATCH = 4, 5, 6, 7


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _clusters(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"cluster sizes must be >= 1, got {text!r}")
    return sizes


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _nonneg_float(text: str) -> float:
    x = float(text)
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return x


def _fraction(text: str) -> float:
    x = float(text)
    if not 0 <= x <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return x


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return n


def _add_generation(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario generation")
    g.add_argument("--clusters", type=_clusters, default=(3, 3, 3), help="sensor cluster sizes, e.g. 3,3,3")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", type=_nonneg_float, default=0.0, help="range noise standard deviation")
    g.add_argument("--outside-frac", type=_fraction, default=0.5, help="fraction of sensors outside the anchor hull")
    g.add_argument("--ambiguous", action="store_true", help="place one exactly ambiguous sensor per cluster")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rangeloc", description="Range-only sensor network localization.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a generated scenario file")
    _add_generation(gen)
    gen.add_argument("-o", "--output", required=True, help="scenario file to write")

    loc = sub.add_parser("localize", help="run the distributed iteration on a scenario")
    loc.add_argument("scenario", nargs="?", help="scenario file (generated from flags when omitted)")
    _add_generation(loc)
    loc.add_argument("--tol", type=_positive_float, default=None, help="step tolerance (default 1e-9 x anchor spread)")
    loc.add_argument("--max-iter", type=_positive_int, default=MAX_ITER)
    loc.add_argument("--trace", help="CSV file for per-round estimates")
    loc.add_argument("--stride", type=_positive_int, default=None, help="rounds between trace snapshots")
    loc.add_argument(
        "--gain-search",
        choices=("first", "best"),
        default="first",
        help="take the first admissible candidate gain, or the best-conditioned one",
    )

    ver = sub.add_parser("verify-signs", help="compare resolved signs against the ground truth")
    ver.add_argument("scenario", nargs="?", help="scenario file (generated from flags when omitted)")
    _add_generation(ver)
    return parser


def _emit(out, **fields) -> None:
    parts = []
    for k, v in fields.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        v = str(v)
        parts.append(f"{k}={shlex.quote(v) if (' ' in v or not v) else v}")
    print(" ".join(parts), file=out)


def _config(args) -> GenerationConfig:
    return GenerationConfig(
        clusters=args.clusters,
        seed=args.seed,
        noise=args.noise,
        outside_frac=args.outside_frac,
        ambiguous=args.ambiguous,
    )


def _scenario(args) -> Scenario:
    if getattr(args, "scenario", None):
        return load(args.scenario)
    return generate(_config(args))


def cmd_generate(args, out) -> int:
    s = generate(_config(args))
    save(s, args.output)
    sizes = [len(c) for c in s.partition.clusters[1:]]
    _emit(
        out,
        path=args.output,
        nodes=len(s.positions),
        anchors=len(s.anchors),
        sensors=len(s.topology.sensors),
        clusters=",".join(map(str, sizes)),
        outside_hull=len(s.outside_hull()),
        seed=s.seed,
    )
    return EXIT_OK


def _write_trace(path, report) -> None:
    trace = report.trace
    ids = report.system.sensor_ids
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "node_id", "x", "y", "residual"])
        for t, z in trace.snapshots:
            r = f"{trace.residuals[t]:.17g}"
            for u, (x, y) in zip(ids, z):
                w.writerow([t, u, f"{x:.17g}", f"{y:.17g}", r])


def cmd_localize(args, out) -> int:
    s = _scenario(args)
    report = localize(s, tol=args.tol, max_iter=args.max_iter, search=args.gain_search, stride=args.stride)
    if args.trace:
        _write_trace(args.trace, report)
    tr = report.trace
    _emit(
        out,
        status=tr.reason,
        iterations=tr.iterations,
        residual=float(tr.residuals[-1]),
        max_error_vs_direct=report.error_vs_direct,
        max_error_vs_truth=report.error_vs_truth(s),
        rho_iteration=report.rho_iteration,
        rho_C=report.rho_C,
        sensors=report.system.n_sensors,
        outside_hull=len(s.outside_hull()),
        spread=report.spread,
    )
    return EXIT_OK


def _signs(pattern) -> str:
    return "".join("+" if p > 0 else "-" if p < 0 else "0" for p in pattern)


def cmd_verify_signs(args, out) -> int:
    s = _scenario(args)
    topo = s.topology
    passed = 0
    for l in topo.sensors:
        trip = topo.triplets[l]
        oracle = areal_from_coordinates(s.positions[l], *(s.positions[u] for u in trip))
        expected = _signs(oracle.signs)
        try:
            res = resolve_with_branch(topo.quad(l), trip)
            got, branch = _signs(res.pattern), res.branch
            ok = _same_signs(res.pattern, oracle.coeffs)
        except Exception as exc:  # noqa: BLE001 - reported as a failed sensor
            got, branch, ok = "?", f"error: {exc}", False
        passed += ok
        _emit(out, sensor=l, verdict="pass" if ok else "fail", expected=expected, got=got, branch=branch)
    n = len(topo.sensors)
    _emit(out, sensors=n, passed=passed, pass_rate=passed / n if n else 1.0)
    return EXIT_OK if passed == n else EXIT_MISMATCH


def _same_signs(pattern, oracle) -> bool:
    # An oracle coefficient at rounding level has no meaningful sign.
    oracle = np.asarray(oracle, dtype=float)
    floor = 1e-9 * max(1.0, np.abs(oracle).sum())
    return all(p * c > 0 or abs(c) <= floor for p, c in zip(pattern, oracle))


_COMMANDS = {"generate": cmd_generate, "localize": cmd_localize, "verify-signs": cmd_verify_signs}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except GenerationFailure as exc:
        print(f"error: {exc}", file=err)
        return EXIT_GENERATE
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except SignResolutionError as exc:
        print(f"error: sign resolution failed for sensor {exc.node}: {exc.cause}", file=err)
        return EXIT_SIGNS
    except DesignFailure as exc:
        print(f"error: gain design failed for cluster {exc.cluster}: {exc}", file=err)
        return EXIT_DESIGN
    except (NotSchur, SingularSystem) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DESIGN
    except Diverged as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
