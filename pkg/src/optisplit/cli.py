"""Command-line interface: ``optisplit {ratio,analyze,split,simulate}``.

Exit codes: 0 success, 2 invalid arguments / I/O / schema / configuration
errors, 3 when rank deficiency leaves no candidate features.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from .data import load_csv, read_csv_table
from .errors import ConfigError, DataError, EmptyCandidateSetError, OptisplitError
from .report import AnalyzeReport
from .selection import estimate_p
from .simulator import ChebyshevModel, InterceptModel, SimConfig, default_grid, run_simulation
from .splitter import make_split
from .theory import SplitRatio, optimal_ratio, three_way_ratios

log = logging.getLogger("optisplit")

EXIT_USAGE = 2
EXIT_EMPTY = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("OPTISPLIT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"OPTISPLIT_WORKERS must be an integer, got {env!r}") from None
    return 1


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_ratio(args) -> int:
    if args.p < 1:
        raise CliError(f"--p must be >= 1, got {args.p}")
    ratio = optimal_ratio(args.p)
    out = {"p": args.p, "gamma_star": ratio.gamma}
    if args.N is not None:
        if args.N < 2:
            raise CliError(f"--N must be >= 2, got {args.N}")
        out.update(N=args.N, n=ratio.n_of(args.N), m=ratio.m_of(args.N))
    if args.three_way:
        out["three_way"] = three_way_ratios(args.p)
    if args.json:
        _emit_json(out)
        return 0
    print(f"gamma* = {ratio.gamma:.4f}")
    print(f"train:test = {math.sqrt(args.p):.4f}:1")
    if args.N is not None:
        print(f"n = {out['n']}")
        print(f"m = {out['m']}")
    if args.three_way:
        tw = out["three_way"]
        print(f"train/validation/test = {tw['train']:.4f} / {tw['validation']:.4f} / {tw['test']:.4f}")
    return 0


def _load(args):
    try:
        return load_csv(args.csv, args.response, args.categorical)
    except FileNotFoundError as exc:
        raise CliError(f"cannot read {args.csv}: {exc.strerror}") from exc
    except DataError as exc:
        raise CliError(str(exc)) from exc


def _analyze(args, data) -> AnalyzeReport:
    try:
        _, result = estimate_p(data, not args.no_interactions, not args.no_quadratics,
                               args.criterion, args.direction, args.start)
    except EmptyCandidateSetError as exc:
        raise CliError(str(exc), EXIT_EMPTY) from exc
    except OptisplitError as exc:
        raise CliError(str(exc)) from exc
    return AnalyzeReport.build(result, data.row_count, warnings=result.warnings)


def cmd_analyze(args) -> int:
    data = _load(args)
    report = _analyze(args, data)
    if args.json:
        sys.stdout.write(report.to_json() + "\n")
    else:
        print(report.to_text())
    return 0


def cmd_split(args) -> int:
    if (args.gamma is None) == (not args.auto):
        raise CliError("give exactly one of --gamma or --auto")
    data = _load(args)
    p = None
    if args.auto:
        report = _analyze(args, data)
        gamma, p = report.gamma_star, report.p
    else:
        gamma = args.gamma
        if not 0 < gamma < 1:
            raise CliError(f"--gamma must lie in (0, 1), got {gamma}")
    try:
        plan = make_split(data, SplitRatio(gamma, p), args.method, args.seed, args.max_iters)
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    header, rows = read_csv_table(args.csv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, idx in (("train.csv", plan.train_indices), ("test.csv", plan.test_indices)):
            with open(out / name, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows[i] for i in idx)
        doc = plan.to_dict()
        if p is not None:
            doc["p"] = p
        (out / "split_plan.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc}") from exc
    if args.stdout:
        _emit_json(doc)
    else:
        msg = f"gamma = {gamma:.4f}: train {len(plan.train_indices)} rows, test {len(plan.test_indices)} rows -> {out}"
        if plan.method == "energy":
            msg += f" (energy {plan.initial_energy_value:.6g} -> {plan.energy_value:.6g}, {plan.swaps} swaps)"
        print(msg)
    return 0


def cmd_simulate(args) -> int:
    try:
        if args.model == "intercept":
            model = InterceptModel(args.mu, args.sigma)
            N = args.N if args.N is not None else 100
            reps = args.reps if args.reps is not None else 10_000
        else:
            model = ChebyshevModel(args.p, args.sigma)
            N = args.N if args.N is not None else 100 * args.p
            reps = args.reps if args.reps is not None else 2_000
        grid = tuple(args.gamma) if args.gamma else default_grid()
        config = SimConfig(model, N, grid, reps, args.seed, args.splitter, args.max_iters,
                           common_random_numbers=not args.no_crn).validate()
    except (ConfigError, ValueError) as exc:
        raise CliError(f"invalid simulation config: {exc}") from exc

    curve = run_simulation(config, workers=_workers(args), overlay=args.overlay_exact)
    if args.stdout:
        curve.to_csv(sys.stdout, overlay=args.overlay_exact)
        return 0
    out = Path(args.out if args.out else f"{args.model}_N{N}_seed{args.seed}.csv")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        meta = curve.write(out, overlay=args.overlay_exact)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {out} and {meta}")
    print(f"argmin gamma of mean_sq_err = {curve.argmin_gamma():g}")
    return 0


def _add_analysis_flags(p):
    p.add_argument("csv", help="input CSV with a header row")
    p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("--no-interactions", action="store_true", help="omit two-factor interactions")
    p.add_argument("--no-quadratics", action="store_true", help="omit quadratic terms")
    p.add_argument("--criterion", choices=("aic", "cp"), default="aic")
    p.add_argument("--direction", choices=("both", "forward"), default="both")
    p.add_argument("--start", choices=("auto", "intercept", "full"), default="auto",
                   help="stepwise start model (auto tries both and keeps the better)")
    p.add_argument("--categorical", choices=("reject", "one_hot"), default="reject")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optisplit",
                                     description="Optimal train/test splitting ratio.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ratio", help="optimal ratio 1/(sqrt(p)+1) for a given p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--three-way", action="store_true", help="train/validation/test weights")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("analyze", help="estimate p by stepwise selection and report the ratio")
    _add_analysis_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("split", help="write train.csv, test.csv and split_plan.json")
    _add_analysis_flags(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--auto", action="store_true", help="use gamma* from analyze")
    p.add_argument("--method", choices=("random", "energy"), default="random")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--stdout", action="store_true", help="also print the plan JSON")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("simulate", help="Monte Carlo risk curve over a gamma grid")
    models = p.add_subparsers(dest="model", required=True)
    for name in ("intercept", "chebyshev"):
        m = models.add_parser(name)
        if name == "intercept":
            m.add_argument("--mu", type=float, default=0.0)
        else:
            m.add_argument("--p", type=int, required=True, help="number of coefficients")
        m.add_argument("--sigma", type=float, default=1.0)
        m.add_argument("--N", type=int, help="rows (default 100 for intercept, 100p for chebyshev)")
        m.add_argument("--reps", type=int, help="replicates (default 10000 / 2000)")
        m.add_argument("--seed", type=_seed, required=True)
        m.add_argument("--gamma", type=float, nargs="+", help="grid (default 0.05..0.95 by 0.05)")
        m.add_argument("--splitter", choices=("random", "energy"), default="random")
        m.add_argument("--max-iters", type=int, default=1000)
        m.add_argument("--no-crn", action="store_true",
                       help="independent draws per grid ratio instead of common random numbers")
        m.add_argument("--overlay-exact", action="store_true", help="append the exact_mse column")
        m.add_argument("--workers", type=int, help="processes (default $OPTISPLIT_WORKERS or 1)")
        m.add_argument("--out", help="curve CSV path; a .json sidecar is written next to it")
        m.add_argument("--stdout", action="store_true", help="print the curve CSV instead")
        m.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"optisplit: error: {exc}", file=sys.stderr)
        return exc.code
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
