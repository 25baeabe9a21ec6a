"""Command-line entry point: ``vsn-energy {surface,optimize,simulate,compare,fit}``.

Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 model precondition
violated (e.g. Exponential traffic with p <= b).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import DomainError, Normalization, OperatingPoint, PreconditionError
from .energy import energy_surface
from .fitting import (default_candidates, fit_mean, ks_diagnostics, read_reference_surface,
                      read_sizes, select_family)
from .optimizer import compare, optimize
from .scenario import load_scenario
from .simulate import Coupling, validate_surface

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_PRECONDITION = 0, 2, 3, 4


class InputError(DomainError):
    pass


def parse_range(text: str, integer: bool = False) -> list:
    """``start:stop[:step]`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [start + i * step for i in range(count)]
        else:
            vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad range {text!r}; use start:stop[:step] or a,b,c") from None
    if not vals:
        raise InputError(f"empty range {text!r}")
    if integer:
        if any(not v.is_integer() for v in vals):
            raise InputError(f"range {text!r} must contain integers")
        return [int(v) for v in vals]
    return vals


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload + "\n")
    else:
        print(payload)


def _frames(k_display: float, T: float, mode: Normalization) -> float:
    return k_display * T if mode is Normalization.PER_SECOND else k_display


def _k_display_default(sc, mode: Normalization) -> list[float]:
    k0 = sc.constraints.k_min / (sc.tier.T if mode is Normalization.PER_SECOND else 1.0)
    return list(np.linspace(k0, 5.0 * k0, 9))


def cmd_surface(args, sc, mode):
    ns = parse_range(args.n_range, integer=True) if args.n_range else list(
        range(sc.constraints.n_min, sc.constraints.n_max + 1))
    ks = parse_range(args.k_range) if args.k_range else _k_display_default(sc, mode)
    surf = energy_surface(sc.rates, sc.tier, sc.traffic, ns, [_frames(k, sc.tier.T, mode) for k in ks])
    surf.write_csv(args.out if args.out else sys.stdout, mode)
    return EXIT_OK


def cmd_optimize(args, sc, mode):
    res = optimize(sc.rates, sc.tier, sc.traffic, sc.constraints, args.paper_literal_beta_e)
    _emit(json.dumps(res.report(sc.tier, mode), indent=2), args.out)
    return EXIT_OK


def cmd_simulate(args, sc, mode):
    ns = parse_range(args.n_range, integer=True) if args.n_range else list(
        range(sc.constraints.n_min, sc.constraints.n_max + 1))
    ks_disp = parse_range(args.k_range) if args.k_range else [
        sc.constraints.k_min / (sc.tier.T if mode is Normalization.PER_SECOND else 1.0)]
    ks = sorted({max(1, int(round(_frames(k, sc.tier.T, mode)))) for k in ks_disp})
    rep = validate_surface(sc.rates, sc.tier, sc.traffic, ns, ks, args.intervals, args.seed,
                           Coupling(args.mode), workers=args.workers)
    if args.out and args.out.endswith(".csv"):
        rep.write_csv(args.out, mode)
        summary = rep.to_dict(mode)
        summary.pop("cells")
        print(json.dumps(summary, indent=2))
    else:
        _emit(rep.to_json(mode), args.out)
    return EXIT_OK


def cmd_compare(args, sc, mode):
    adhoc = None
    if args.adhoc_n is not None or args.adhoc_k is not None:
        n = args.adhoc_n if args.adhoc_n is not None else sc.constraints.n_min
        k = (_frames(args.adhoc_k, sc.tier.T, mode) if args.adhoc_k is not None
             else sc.constraints.k_min)
        adhoc = OperatingPoint(n, k)
    res = compare(sc.rates, sc.tier, sc.traffic, sc.constraints, adhoc, args.paper_literal_beta_e)
    _emit(json.dumps(res.report(sc.tier, mode), indent=2), args.out)
    return EXIT_OK


def cmd_fit(args, sc, mode):
    if not args.sizes and not args.surface:
        raise InputError("fit needs --sizes and/or --surface")
    out = {}
    r_hat = sc.traffic.r
    alphas = parse_range(args.alpha) if args.alpha else [4.0]
    if args.sizes:
        sizes = read_sizes(args.sizes)
        k_frames = (_frames(args.sizes_k, sc.tier.T, mode) if args.sizes_k is not None
                    else float(math.ceil(sc.constraints.k_min)))
        r_hat = fit_mean(sizes, k_frames, sc.tier.d)
        out["r_hat"] = r_hat
        out["ks"] = ks_diagnostics(sizes, k_frames, sc.tier.d, default_candidates(r_hat, alphas))
    if args.surface:
        ref = read_reference_surface(args.surface)
        if mode is Normalization.PER_SECOND:
            T = sc.tier.T
            ref = [(n, k * T, e * T) for n, k, e in ref]
        res = select_family(ref, sc.rates, sc.tier, r_hat, default_candidates(r_hat, alphas))
        out.update(res.to_dict())
    out.setdefault("r_hat", r_hat)
    _emit(json.dumps(out, indent=2), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--normalization", choices=[m.value for m in Normalization],
                        default=Normalization.PER_SECOND.value,
                        help="units of k and energies on input and output (default: per-second)")

    parser = argparse.ArgumentParser(prog="vsn-energy",
                                     description="Energy model and (n, k) optimizer for visual sensor tiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", parents=[common], help="write the energy surface as CSV")
    p.add_argument("--n-range", help="node counts, e.g. 2:16")
    p.add_argument("--k-range", help="frame rates, e.g. 2:10:1 (default: 9 points from k_min to 5 k_min)")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("optimize", parents=[common], help="print the constrained optimum as JSON")
    p.add_argument("--paper-literal-beta-e", action="store_true",
                   help="use ln((b+p)/p) in the Exponential node-axis constant")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo validation of the surface")
    p.add_argument("--n-range")
    p.add_argument("--k-range", help="frame rates; rounded to whole frames per interval")
    p.add_argument("--intervals", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in Coupling], default=Coupling.MARGINAL.value)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="gain of the optimum over an ad-hoc point")
    p.add_argument("--adhoc-n", type=int, help="default: n_min")
    p.add_argument("--adhoc-k", type=float, help="default: k_min")
    p.add_argument("--paper-literal-beta-e", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fit", parents=[common], help="fit r and rank traffic families")
    p.add_argument("--sizes", help="newline-delimited interval sizes in bits")
    p.add_argument("--sizes-k", type=float, help="frame rate the sizes were recorded at (default: k_min)")
    p.add_argument("--surface", help="reference CSV n,k,joules")
    p.add_argument("--alpha", help="Pareto shapes to try, e.g. 2,3,4 (default: 4)")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "intervals", 1) < 1:
        parser.error("--intervals must be >= 1")
    mode = Normalization(args.normalization)
    try:
        sc = load_scenario(args.scenario)
        return args.func(args, sc, mode)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
