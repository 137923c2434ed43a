"""Command-line interface.

Subcommands:
  sample  draw discrete Gaussian (or exp(-||y||^q)) vectors from a lattice
  count   estimate or exactly count lattice points in a ball
  verify  run the statistical self-checks and emit a JSON report

Lattices are JSON files: {"basis": [[col], [col], ...], "shift": [..]?}
with entries as rational strings ("3", "-1/2").  All randomized commands
take a mandatory --seed; the same seed reproduces the same output exactly.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 iteration
cap exceeded, 4 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .core import (
    Basis,
    DimensionCapError,
    IterationLimitError,
    ShiftedLattice,
    format_vec,
    rat,
    zero_vec,
)
from .counting import FAITHFUL as COUNT_FAITHFUL, FAST as COUNT_FAST, estimate_count, estimate_primitive_count
from .norms import NormBody, chi_q_decomposition
from .oracles import exact_count, exact_dgs, exact_primitive_count
from .samplers import FAITHFUL as SAMPLE_FAITHFUL, FAST as SAMPLE_FAST, CdgsSvpSampler, DgsCvpSampler
from .verify import closeness_check, collect

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_ITERATION_CAP = 3
EXIT_DIMENSION_CAP = 4


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def load_lattice(path: str) -> ShiftedLattice:
    with open(path) as fh:
        obj = json.load(fh)
    cols = [[Fraction(x) for x in col] for col in obj["basis"]]
    basis = Basis(cols)
    shift = obj.get("shift")
    if shift is None:
        return ShiftedLattice(basis, zero_vec(basis.n))
    return ShiftedLattice(basis, tuple(Fraction(x) for x in shift))


def _radius_sq_from_args(args) -> Fraction:
    if args.radius_sq is not None:
        if args.radius is not None:
            raise SystemExit("give --radius or --radius-sq, not both")
        return args.radius_sq
    if args.radius is None:
        raise SystemExit("one of --radius / --radius-sq is required")
    return args.radius * args.radius


def cmd_sample(args) -> int:
    lat = load_lattice(args.lattice)
    rng = np.random.default_rng(args.seed)
    params = SAMPLE_FAST if args.fast else SAMPLE_FAITHFUL
    counter = "ladder" if args.ladder_count else "exact"
    if args.kind == "dgs":
        sampler = DgsCvpSampler(lat, args.s, args.f, counter=counter,
                                params=params, rng=rng)
        draws = sampler.sample_batch(args.num, rng)
    elif args.kind == "cdgs":
        sampler = CdgsSvpSampler(lat.basis, args.s, args.f, counter=counter,
                                 params=params, rng=rng)
        draws = sampler.sample_batch(args.num, rng)
    else:  # lq
        if args.s != 1:
            raise SystemExit("lq sampling is defined at width 1; rescale "
                             "the lattice instead of passing --s")
        dec = chi_q_decomposition(lat, NormBody(args.body), args.q, args.f,
                                  params=params)
        draws = dec.sample_batch(args.num, rng)
    for v in draws:
        print(format_vec(v))
    return EXIT_OK


def cmd_count(args) -> int:
    lat = load_lattice(args.lattice)
    r_sq = _radius_sq_from_args(args)
    if args.exact:
        if args.primitive:
            value = exact_primitive_count(lat.basis, r_sq)
        else:
            value = exact_count(lat, r_sq)
        print(json.dumps({"value": value, "exact": True}))
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    params = COUNT_FAST if args.fast else COUNT_FAITHFUL
    if args.primitive:
        est = estimate_primitive_count(lat.basis, r_sq, args.f, rng,
                                       params=params)
        print(json.dumps({"value": est.value,
                          "lower_factor": est.lower_factor,
                          "confidence": est.confidence,
                          "degenerate": est.degenerate,
                          "empty": est.empty, "exact": False}))
    else:
        est = estimate_count(lat, r_sq, args.f, rng, params=params)
        print(json.dumps({"value": est.value,
                          "lower_factor": est.lower_factor,
                          "confidence": est.confidence, "exact": False}))
    return EXIT_OK


def _verify_cases(suite: str):
    one = Fraction(1)
    z2 = ShiftedLattice(Basis([[one, 0], [0, one]]), (Fraction(0), Fraction(0)))
    shifted = ShiftedLattice(Basis([[Fraction(3), 0], [0, Fraction(1, 2)]]),
                             (Fraction(3, 2), Fraction(1, 4)))
    cases = [
        ("dgs-z2", "dgs", z2, Fraction(1)),
        ("cdgs-z2", "cdgs", z2, Fraction(1)),
    ]
    if suite == "full":
        cases += [
            ("dgs-shifted", "dgs", shifted, Fraction(3, 2)),
            ("cdgs-rect", "cdgs", shifted, Fraction(1)),
        ]
    return cases


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    n = 20_000 if args.suite == "quick" else 100_000
    f = 3
    gamma = 1.0 + 1.0 / f
    reports = {}
    ok = True
    for name, kind, lat, s in _verify_cases(args.suite):
        if kind == "dgs":
            sampler = DgsCvpSampler(lat, s, f, counter="exact",
                                    params=SAMPLE_FAST)
            ideal = exact_dgs(lat, s, 2**-40)
            radius_sq = sampler.radii_sq[-1] * s * s
        else:
            sampler = CdgsSvpSampler(lat.basis, s, f, counter="exact",
                                     params=SAMPLE_FAST)
            ideal = exact_dgs(ShiftedLattice(lat.basis, zero_vec(lat.n)),
                              s, 2**-40)
            radius_sq = None
        hist = collect(sampler.sample_batch, n, rng)
        rep = closeness_check(hist, ideal, gamma=gamma, eps=2.0**-f,
                              radius_sq=radius_sq)
        reports[name] = json.loads(rep.to_json())
        ok = ok and rep.passed
    out = json.dumps({"passed": ok, "samples_per_case": n,
                      "cases": reports}, indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgslab",
                                 description="Lattice discrete Gaussian "
                                             "sampling and counting toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw lattice vectors")
    sp.add_argument("kind", choices=["dgs", "cdgs", "lq"])
    sp.add_argument("--lattice", required=True, help="lattice JSON file")
    sp.add_argument("--s", type=parse_rational, default=Fraction(1),
                    help="Gaussian width (rational, default 1)")
    sp.add_argument("--f", type=int, default=3,
                    help="quality parameter; output is (1+1/f)-close")
    sp.add_argument("--num", type=int, default=1, help="number of draws")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--fast", action="store_true",
                    help="smaller sparsification primes (documented "
                    "heuristic margins)")
    sp.add_argument("--ladder-count", action="store_true",
                    help="use the randomized count estimator for mixture "
                    "weights instead of exhaustive counting (slow)")
    sp.add_argument("--body", choices=[b.value for b in NormBody],
                    default="l1", help="norm ball for lq sampling")
    sp.add_argument("--q", type=int, default=1, help="exponent for lq")
    sp.set_defaults(func=cmd_sample)

    cp = sub.add_parser("count", help="count lattice points in a ball")
    cp.add_argument("--lattice", required=True)
    cp.add_argument("--radius", type=parse_rational, default=None)
    cp.add_argument("--radius-sq", type=parse_rational, default=None)
    cp.add_argument("--f", type=int, default=2,
                    help="estimate is within factor (1+1/f)^(1/10) below "
                    "the true count")
    cp.add_argument("--seed", type=int, default=None)
    cp.add_argument("--exact", action="store_true",
                    help="exhaustive enumeration instead of estimation")
    cp.add_argument("--primitive", action="store_true",
                    help="count primitive vector pairs of the centered "
                    "lattice")
    cp.add_argument("--fast", action="store_true")
    cp.set_defaults(func=cmd_count)

    vp = sub.add_parser("verify", help="statistical self-checks")
    vp.add_argument("--suite", choices=["quick", "full"], default="quick")
    vp.add_argument("--seed", type=int, required=True)
    vp.add_argument("--report", default=None, help="write JSON report here")
    vp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "count" and not args.exact and args.seed is None:
        ap.error("--seed is required unless --exact is given")
    try:
        return args.func(args)
    except IterationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ITERATION_CAP
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION_CAP


if __name__ == "__main__":
    sys.exit(main())
