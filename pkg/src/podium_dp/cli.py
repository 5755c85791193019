"""``podium-dp`` command line: table, efficiency, simulate, certify.

Exit codes: 0 success (or certified), 1 certification failure, 2 usage or
validation error.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Mechanism, PrivacyParams
from .errors import PrivacyError, ZeroDensity
from .podium import SolverMode, compute_shape, lookup_table
from .simulate import ExperimentConfig, InputDist, write_records
from .verify import (
    LaplaceDensity,
    PodiumDensity,
    StaircaseDensity,
    TruncatedLaplaceDensity,
    certify_ratio,
    efficiency_table,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

TABLE_GRID = [round(0.1 * i, 1) for i in range(1, 51)] + [6.0, 7.0, 8.0, 9.0, 10.0]
EFFICIENCY_GRID = (
    [round(0.1 * i, 1) for i in range(1, 10)]
    + [1.0, math.log(3), math.log(16), math.log(32), 5.0, 10.0, 20.0, 30.0, 40.0, 50.0]
)

_LOG_RE = re.compile(r"^log\(?\s*([0-9.eE+-]+)\s*\)?$")


def parse_epsilons(text: str) -> list[float]:
    """Parse a comma-separated list; entries may be numbers or ``log(N)``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = _LOG_RE.match(part)
        try:
            out.append(math.log(float(m.group(1))) if m else float(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number or log(N): {part!r}") from None
    return out


def _fmt17(v: float) -> str:
    return f"{v:.17g}"


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _eps_list(args, default: Sequence[float]) -> list[float]:
    if args.epsilon is None:
        return list(default)
    eps = [e for group in args.epsilon for e in group]
    if not eps:
        raise argparse.ArgumentTypeError("empty epsilon list")
    return eps


def cmd_table(args) -> int:
    rows = lookup_table(_eps_list(args, TABLE_GRID), args.delta)
    with _open_out(args.out) as fh:
        fh.write("epsilon,exp_epsilon,d_delta,w_over_delta,m,s\n")
        for row in rows:
            fh.write(",".join(_fmt17(v) for v in row) + "\n")
    return EXIT_OK


def cmd_efficiency(args) -> int:
    rows = efficiency_table(_eps_list(args, EFFICIENCY_GRID), args.delta)
    fmt = _fmt17 if args.decimals is None else (lambda v: f"{v:.{args.decimals}f}")
    with _open_out(args.out) as fh:
        fh.write("epsilon,pm3_over_pm,pm0_over_pm_half,pm_over_lm,sm_over_lm,pm0_over_sm,pm_over_sm\n")
        for row in rows:
            fh.write(",".join([_fmt17(row[0])] + [fmt(v) for v in row[1:]]) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    eps = _eps_list(args, [1.0])
    if len(eps) != 1:
        raise argparse.ArgumentTypeError("simulate takes exactly one --epsilon")
    mech = args.mechanism
    if mech == "podium":
        mech = "podium-exact" if args.mode == "exact" else "podium-approx"
    cfg = ExperimentConfig(
        mechanism=Mechanism(mech),
        epsilon=eps[0],
        n=args.n,
        seed=args.seed,
        input_dist=InputDist.parse(args.dist),
        out_path=args.out,
        delta=args.delta,
    )
    if args.out is None or args.out == "-":
        summary = write_records(cfg, _NullWriter(), workers=args.workers)
    else:
        with _open_out(args.out) as fh:
            summary = write_records(cfg, fh, workers=args.workers)
    print(summary.line(cfg))
    return EXIT_OK


class _NullWriter:
    def write(self, _):
        pass


def _certify_density(name: str, params: PrivacyParams, mode: str):
    if name == "podium":
        name = "podium-exact" if mode == "exact" else "podium-approx"
    if name in ("podium-exact", "podium-approx"):
        m = SolverMode.EXACT if name == "podium-exact" else SolverMode.APPROXIMATE
        shape = compute_shape(params, m)
        return name, PodiumDensity(shape), (shape.lo, shape.hi)
    span = 5.0 * params.delta_sens / params.epsilon + params.delta_sens
    if name == "laplace":
        return name, LaplaceDensity(params), (-span, span)
    if name == "staircase":
        return name, StaircaseDensity(params), (-span, span)
    if name == "truncated-laplace":
        dens = TruncatedLaplaceDensity(params)
        reach = dens.bound + params.delta_sens
        return name, dens, (-reach, reach)
    raise argparse.ArgumentTypeError(f"unknown mechanism {name!r}")


def cmd_certify(args) -> int:
    eps = _eps_list(args, [1.0])
    status = EXIT_OK
    for e in eps:
        params = PrivacyParams(e, args.delta)
        name, dens, (zlo, zhi) = _certify_density(args.mechanism, params, args.mode)
        half = params.delta_sens / 2
        x_grid = np.linspace(-half, half, args.nx)
        z_grid = np.linspace(zlo, zhi, args.nz)
        try:
            rep = certify_ratio(dens, params, x_grid, z_grid)
        except ZeroDensity as exc:
            print(f"mechanism={name} epsilon={e!r} result=FAIL reason=zero-density detail={exc}")
            status = EXIT_FAILED
            continue
        ok = rep.certified
        line = (
            f"mechanism={name} epsilon={e!r} result={'PASS' if ok else 'FAIL'} "
            f"grid={args.nx}x{args.nz} max_log_ratio={rep.max_log_ratio!r} "
            f"min_log_ratio={rep.min_log_ratio!r} violations={rep.violations}"
        )
        if rep.ratio_set:
            line += " ratio_set={" + ", ".join(f"{v:.12g}" for v in rep.ratio_set) + "}"
        print(line)
        if not ok:
            status = EXIT_FAILED
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="podium-dp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps_help):
        p.add_argument("--epsilon", action="append", type=parse_epsilons, help=eps_help)
        p.add_argument("--delta", type=float, default=1.0, help="sensitivity (default 1.0)")
        p.add_argument("--mode", choices=["exact", "approx"], default="exact")
        p.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")

    p = sub.add_parser("table", help="Podium shape lookup table as CSV")
    common(p, "epsilon values (repeatable, comma lists, log(N) allowed)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("efficiency", help="relative efficiency table as CSV")
    common(p, "epsilon values (repeatable, comma lists, log(N) allowed)")
    p.add_argument("--decimals", type=int, default=None, help="fixed decimals instead of 17 significant digits")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("simulate", help="privatize simulated inputs, write records as CSV")
    common(p, "privacy budget (default 1.0)")
    p.add_argument(
        "--mechanism",
        choices=[m.value for m in Mechanism] + ["podium"],
        default="podium-exact",
    )
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", default="beta22", help="beta22 | uniform | fixed=<v>")
    p.add_argument("--workers", type=int, default=1)
    p.epilog = "Without --out only the summary line is printed."
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="check density ratios on a grid")
    common(p, "privacy budget (repeatable; default 1.0)")
    p.add_argument(
        "--mechanism",
        choices=["podium", "podium-exact", "podium-approx", "laplace", "staircase", "truncated-laplace"],
        default="podium-exact",
    )
    p.add_argument("--nx", type=int, default=101, help="input grid size")
    p.add_argument("--nz", type=int, default=10001, help="output grid size")
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (argparse.ArgumentTypeError, PrivacyError, ValueError) as exc:
        print(f"podium-dp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"podium-dp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
