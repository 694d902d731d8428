"""Command-line interface.

Subcommands: fit, sample, region, simulate, diagnose. Exit codes:
0 success, 2 usage error, 3 data error, 4 numerical error. Diagnostics go
to standard error.

Target indices on the command line are 1-based.
"""

import argparse
import json
import sys

import numpy as np

from .data import load_csv, load_scenario, read_matrix_csv
from .errors import ConfigError, DataError, NumericalError
from .model import ISVBConfig, draw, fit, model_from_json, model_to_json
from .regions import ellipsoid_from_samples, interval_from_samples
from .rng import rng_stream
from .simulate import RunConfig, design_diagnostics, run_scenario, write_metrics_csv
from .target import GPrior

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _parse_targets(text):
    try:
        idx = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"targets must be comma-separated integers, got {text!r}") from exc
    if not idx or any(i < 1 for i in idx):
        raise ConfigError("targets are 1-based positive indices")
    return np.asarray(idx, dtype=np.int64) - 1


def _cmd_fit(args):
    dataset = load_csv(args.x, args.y, header=args.header)
    g = GPrior(args.g, sigma_n=args.sigma_n)
    cfg = ISVBConfig(g=g)
    model = fit(dataset, _parse_targets(args.targets), cfg, rng_stream(args.seed))
    with open(args.out, "w") as fh:
        json.dump(model_to_json(model), fh)
    print(f"wrote model to {args.out}", file=sys.stderr)


def _cmd_sample(args):
    with open(args.model) as fh:
        model = model_from_json(json.load(fh))
    draws = draw(model, args.n_samples, rng_stream(args.seed))
    header = ",".join(f"beta_{int(j) + 1}" for j in model.target_indices)
    with open(args.out, "w") as fh:
        fh.write(header + "\n")
        for row in draws:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {draws.shape[0]} samples to {args.out}", file=sys.stderr)


def _read_samples(path):
    with open(path) as fh:
        lines = [ln for ln in (line.strip() for line in fh) if ln]
    if not lines:
        raise DataError(f"samples file {path} is empty")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1  # header row
    rows = []
    for i, line in enumerate(lines[start:]):
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise DataError(f"samples file {path}: non-numeric data row {i + 1}") from exc
    return np.asarray(rows, dtype=float)


def _cmd_region(args):
    samples = _read_samples(args.samples)
    if samples.shape[1] == 1:
        region = interval_from_samples(samples[:, 0], args.level)
    else:
        region = ellipsoid_from_samples(samples, args.level)
    with open(args.out, "w") as fh:
        json.dump(region.to_json(), fh)
    print(f"wrote region to {args.out}", file=sys.stderr)


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    cfg = RunConfig(
        scenario=scenario,
        methods=methods,
        n_reps=args.reps,
        seed=args.seed,
        n_samples=args.samples,
        gamma=args.level,
        n_workers=args.threads,
    )
    rows = run_scenario(cfg)
    write_metrics_csv(rows, args.out)
    print(f"wrote metrics for {len(rows)} methods to {args.out}", file=sys.stderr)


def _cmd_diagnose(args):
    X = read_matrix_csv(args.x, header=args.header)
    diag = design_diagnostics(X, _parse_targets(args.targets))
    with open(args.out, "w") as fh:
        json.dump(diag, fh)
    print(f"wrote diagnostics to {args.out}", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isvb",
        description="Debiased spike-and-slab variational inference for sparse linear regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model from CSV data")
    p_fit.add_argument("--x", required=True, help="design matrix CSV")
    p_fit.add_argument("--y", required=True, help="response CSV")
    p_fit.add_argument("--targets", required=True, help="1-based target columns, e.g. 1,2")
    p_fit.add_argument("--g", default="improper", choices=["improper", "gaussian", "laplace"])
    p_fit.add_argument("--sigma-n", dest="sigma_n", type=float, default=None)
    p_fit.add_argument("--header", action="store_true", help="skip one header row in the CSVs")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=_cmd_fit)

    p_sample = sub.add_parser("sample", help="draw target samples from a fitted model")
    p_sample.add_argument("--model", required=True)
    p_sample.add_argument("--n-samples", dest="n_samples", type=int, default=1000)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=_cmd_sample)

    p_region = sub.add_parser("region", help="credible region from a samples CSV")
    p_region.add_argument("--samples", required=True)
    p_region.add_argument("--level", type=float, default=0.95)
    p_region.add_argument("--out", required=True)
    p_region.set_defaults(func=_cmd_region)

    p_sim = sub.add_parser("simulate", help="Monte Carlo scenario run")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--methods", default="isvb,mf")
    p_sim.add_argument("--reps", type=int, default=500)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--samples", type=int, default=1000)
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="design-matrix diagnostics")
    p_diag.add_argument("--x", required=True)
    p_diag.add_argument("--targets", required=True)
    p_diag.add_argument("--header", action="store_true")
    p_diag.add_argument("--out", required=True)
    p_diag.set_defaults(func=_cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
