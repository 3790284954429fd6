"""Command-line entry point: ``complabel {check,bench,combine,bounds,synth}``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .bench import RunManifest, run_bench, run_combine
from .binary_losses import lipschitz_constant
from .checks import run_check
from .data import synth_gaussian
from .exceptions import InvalidInputError
from .theory import BoundInputs, estimation_error_bound, uniform_deviation_bound


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", help="JSON manifest; explicit flags override its values")
    p.add_argument("--dataset", help="CSV file with a header row (default: synthetic Gaussians)")
    p.add_argument("--label-col", dest="label_col")
    p.add_argument("--classes", type=_csv_list(int), help="original labels to keep, e.g. 1,2,3")
    p.add_argument("--synth-classes", dest="synth_classes", type=int)
    p.add_argument("--synth-dim", dest="synth_dim", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--train-per-class", dest="train_per_class", type=int)
    p.add_argument("--test-per-class", dest="test_per_class", type=int)
    p.add_argument("--scheme", dest="schemes", type=_csv_list(str), help="comma list of ova,pc,ml,pl")
    p.add_argument("--loss", dest="losses", type=_csv_list(str), help="one loss or one per scheme")
    p.add_argument("--model", choices=["linear", "mlp"])
    p.add_argument("--alpha", type=float, help="mixing weight of the combined column (combine)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_csv_list(float))
    p.add_argument("--eval-stride", dest="eval_stride", type=int)
    p.add_argument("--out", help="results CSV path; a .md table is written alongside")


_RUN_KEYS = ("dataset", "label_col", "classes", "synth_classes", "synth_dim", "separation",
             "train_per_class", "test_per_class", "schemes", "losses", "model", "alpha", "trials",
             "seed", "iterations", "batch", "learning_rate", "lambda_grid", "eval_stride", "out")


def _manifest(args) -> RunManifest:
    overrides = {k: getattr(args, k) for k in _RUN_KEYS}
    overrides["command"] = args.command
    if args.manifest:
        return RunManifest.from_json(args.manifest, **overrides)
    return RunManifest(**{k: v for k, v in overrides.items() if v is not None})


def _run(args, fn) -> int:
    manifest = _manifest(args)
    table = fn(manifest)
    if manifest.out:
        table.write(manifest.out)
    else:
        sys.stdout.write(table.to_csv())
    sys.stdout.write(table.to_markdown())
    return 0


def _bounds(args) -> int:
    L = args.lipschitz if args.lipschitz is not None else lipschitz_constant(args.loss)
    print("scheme,n,rademacher,uniform_deviation,estimation_error")
    for n in args.n:
        if args.rademacher is not None:
            b = BoundInputs(args.K, L, args.delta, n, rademacher=args.rademacher)
        else:
            b = BoundInputs(args.K, L, args.delta, n, C_w=args.cw, C_phi=args.cphi)
        for scheme in args.scheme:
            print(f"{scheme},{n},{b.rademacher:.10g},{uniform_deviation_bound(scheme, b):.10g},"
                  f"{estimation_error_bound(scheme, b):.10g}")
    return 0


def _synth(args) -> int:
    ds = synth_gaussian(args.K, args.d, args.n_per_class, args.separation, np.random.default_rng(args.seed))
    ds.to_csv(args.out, args.label_col)
    print(f"wrote {ds.n} rows ({ds.K} classes, d={ds.d}) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complabel", description="Learning from complementary labels.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)

    _add_run_args(sub.add_parser("bench", help="complementary-label benchmark (PC/OVA vs ML/PL)"))
    _add_run_args(sub.add_parser("combine", help="ordinary + complementary combination (OL, CL, OL&CL)"))

    p = sub.add_parser("bounds", help="evaluate the estimation-error bounds over n")
    p.add_argument("--scheme", type=_csv_list(str), default=["ova", "pc"])
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--loss", default="sigmoid", help="loss whose Lipschitz constant is used")
    p.add_argument("--lipschitz", type=float)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--rademacher", type=float, help="fixed complexity value (otherwise C_w*C_phi/sqrt(n))")
    p.add_argument("--cw", type=float, default=1.0)
    p.add_argument("--cphi", type=float, default=1.0)
    p.add_argument("--n", type=_csv_list(int), default=[10**2, 10**3, 10**4, 10**5, 10**6])

    p = sub.add_parser("synth", help="write a synthetic Gaussian dataset as CSV")
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n-per-class", dest="n_per_class", type=int, default=500)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label-col", dest="label_col", default="label")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check":
            return run_check(args.seed)
        if args.command == "bench":
            return _run(args, run_bench)
        if args.command == "combine":
            return _run(args, run_combine)
        if args.command == "bounds":
            return _bounds(args)
        return _synth(args)
    except (InvalidInputError, ValueError, OSError) as exc:
        print(f"complabel: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
