"""Command-line front end: ``roe-lab <subcommand> [options]``.

Every subcommand writes ``<stem>.csv`` and ``<stem>.json`` records plus a
``<stem>.txt`` summary into the output directory and prints the summary.
Exit codes: 0 all checks pass (or the expected verdict was reached),
1 a check failed, 2 usage or input error, 3 inconclusive verdict.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import experiments as ex
from .config import load_config, apply_overrides
from .errors import CalibrationError, DomainError, GridMismatchError, InsufficientDecayError
from .report import summary_table, write_records
from .roe_strichartz_engine import KINDS

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _floats(text: str) -> list:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _p_value(text: str) -> float:
    try:
        p = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}") from exc
    if not p >= 1:
        raise argparse.ArgumentTypeError("p must be >= 1 (use inf for the sup norm)")
    return p


def _p_list(text: str) -> list:
    return [_p_value(s) for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roe-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="config file (default: $ROE_LAB_CONFIG)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-euclidean", help="Euclidean eigen-sequences and annulus decay")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--rho-sq", type=float, default=0.0)
    p.add_argument("--J", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.25)

    p = sub.add_parser("verify-spherical", help="spherical-function eigen residuals")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda-list", type=_floats, default=[0.5, 1.0, 2.0])

    p = sub.add_parser("verify-transforms", help="heat-kernel transforms and convolutions")
    p.add_argument("--n", type=int)
    p.add_argument("--t-list", type=_floats, default=[0.3, 0.5, 1.0])

    p = sub.add_parser("verify-slice-projection", help="Abel transform against the spherical transform")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=float, default=0.5)

    p = sub.add_parser("verify-poisson", help="Hardy norms of Poisson transforms")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--p-list", type=_p_list, default=[1.0, 2.0, math.inf])
    p.add_argument("--boundary", help="JSON file with boundary profiles")

    p = sub.add_parser("run-sequence", help="build and check one sequence")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=_complex)
    p.add_argument("--p", type=_p_value, default=math.inf)
    p.add_argument("--M", type=float, default=0.0)
    p.add_argument("--J", type=int)
    p.add_argument("--operator", choices=("relation", "stencil"), default="relation")
    p.add_argument("--boundary", help="JSON file; the first profile is used (poisson only)")

    p = sub.add_parser("run-counterexample", help="certify a counterexample family")
    p.add_argument("--which", choices=("complex-pair", "distinguished"), required=True)
    p.add_argument("--J", type=int)

    p = sub.add_parser("calibrate", help="compute and persist c_inv and kappa")
    p.add_argument("--write", help="config file to write (default: --config, else <out>/roe_lab.cfg)")

    sub.add_parser("emit-profile", help="write radius and lambda profiles (CSV + PNG)")
    return parser


def _write_profile(out_dir: str, name: str, x, series: dict) -> str:
    path = os.path.join(out_dir, f"profile_{name}.csv")
    names = list(series)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + names)
        cols = [np.asarray(series[k], dtype=float) for k in names]
        for i, xv in enumerate(np.asarray(x, dtype=float)):
            w.writerow([repr(float(xv))] + [repr(float(c[i])) for c in cols])
    return path


def _run(args, config):
    cmd = args.command
    n = args.n if getattr(args, "n", None) is not None else config.n
    if cmd == "verify-euclidean":
        return ex.verify_euclidean(args.alpha, args.rho_sq, args.J, args.epsilon, seed=config.seed,
                                   config=config)
    if cmd == "verify-spherical":
        return ex.verify_spherical(n, args.lambda_list, config)
    if cmd == "verify-transforms":
        return ex.verify_transforms(n, args.t_list, config)
    if cmd == "verify-slice-projection":
        return ex.verify_slice_projection(n, args.t, config=config)
    if cmd == "verify-poisson":
        profiles = ex.load_profiles(args.boundary) if args.boundary else None
        return ex.verify_poisson(n, args.lam, args.p_list, profiles, config)
    if cmd == "run-sequence":
        profile = ex.load_profiles(args.boundary)[0] if args.boundary else None
        lam = args.lam
        if lam is None and args.kind not in ("distinguished_counterexample", "distinguished_eigen"):
            raise DomainError(f"--lambda is required for kind {args.kind}")
        if args.kind.startswith("distinguished"):
            n = 2
        spec = ex.make_spec(args.kind, n, lam, args.J, config, profile, args.operator)
        return ex.run_sequence_experiment(spec, args.p, args.M, config)
    if cmd == "run-counterexample":
        return ex.run_counterexample(args.which, config, args.J)
    if cmd == "calibrate":
        new, outcome = ex.calibrate(config)
        target = args.write or args.config or os.path.join(config.output_dir, "roe_lab.cfg")
        os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
        new.save(target)
        outcome.details["config_path"] = target
        return outcome
    if cmd == "emit-profile":
        return ex.emit_profile(config)
    raise DomainError(f"unknown command {cmd}")  # pragma: no cover - argparse guards this


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.set)
        if args.out:
            config = apply_overrides(config, {"output_dir": args.out})
        outcome = _run(args, config)
    except (DomainError, GridMismatchError, OSError) as exc:
        print(f"roe-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InsufficientDecayError, CalibrationError) as exc:
        print(f"roe-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL

    out_dir = config.output_dir
    stem = args.command.replace("-", "_")
    write_records(outcome.records, out_dir, stem, config.record_timing)
    if args.command == "emit-profile":
        from .plotting import render_profile

        for name, (x, series) in sorted(outcome.profiles.items()):
            _write_profile(out_dir, name, x, series)
            render_profile(os.path.join(out_dir, f"profile_{name}.png"), x, series,
                           "lambda" if name == "heat_multiplier" else "r", name.replace("_", " "),
                           logy=name == "heat_multiplier")

    lines = [summary_table(outcome.records)] if outcome.records else []
    if outcome.verdict is not None:
        lines.append(f"verdict: {outcome.verdict} (expected {outcome.expected_verdict})")
    if "config_path" in outcome.details:
        lines.append(f"calibrated config written to {outcome.details['config_path']}")
    status = {EXIT_OK: "PASS", EXIT_FAIL: "FAIL", EXIT_INCONCLUSIVE: "INCONCLUSIVE"}[outcome.exit_code]
    lines.append(f"{args.command}: {status}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, f"{stem}.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return outcome.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
