"""Command-line interface: ``embedcal {generate,surrogate,calibrate,predict,replicas,schema}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, dump_schema, load_config
from .dataio import DataFormatError, load_training_csv, write_csv_dataset
from .demos import DEMOS, generate_data
from .runner import (
    StageError, atomic_write_text, run_calibration, run_prediction, run_replicas, write_json,
)
from .surrogate import IllPosedDesignError, build_surrogate


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _ranges(text: str) -> np.ndarray:
    try:
        pairs = [tuple(float(v) for v in item.split(":")) for item in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi,lo:hi,..., got {text!r}") from None
    if any(len(p) != 2 or p[0] >= p[1] for p in pairs):
        raise argparse.ArgumentTypeError(f"each range must be lo:hi with lo < hi, got {text!r}")
    return np.array(pairs)


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="YAML run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field, e.g. --set mcmc.steps=5000 (repeatable)")
    p.add_argument("--seed", type=int, help="shorthand for --set mcmc.seed=SEED")
    p.add_argument("--steps", type=int, help="shorthand for --set mcmc.steps=STEPS")
    p.add_argument("--output", "-o", help="output directory (beats EMBEDCAL_OUTPUT_DIR and output.dir)")


def _load(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"mcmc.seed={args.seed}")
    if args.steps is not None:
        overrides.append(f"mcmc.steps={args.steps}")
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedcal", description="Embedded model-error calibration with polynomial chaos.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthetic data from a built-in truth function")
    g.add_argument("demo", choices=sorted(DEMOS))
    g.add_argument("--n", type=int, required=True, help="number of data points")
    g.add_argument("--sigma", type=float, help="noise std (default: demo default)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", "-o", required=True, help="CSV path")

    s = sub.add_parser("surrogate", help="least-squares Legendre surrogate from a training CSV")
    s.add_argument("training", help="CSV with lambda* input columns and one output column per location")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--ranges", type=_ranges,
                   help="parameter ranges lo:hi,lo:hi,... (default: training min/max)")
    s.add_argument("--output", "-o", required=True, help="surrogate text file")

    c = sub.add_parser("calibrate", help="run the full calibration workflow from a config")
    _config_args(c)

    p = sub.add_parser("predict", help="recompute predictions from a stored chain")
    _config_args(p)
    p.add_argument("--chain", required=True, help="chain CSV written by 'calibrate'")
    p.add_argument("--mode", choices=["pushed_forward", "posterior_predictive", "map"])

    r = sub.add_parser("replicas", help="replica convergence study over data sizes")
    _config_args(r)
    r.add_argument("--n-values", type=_int_list, help="comma-separated data sizes, e.g. 10,100,1000")
    r.add_argument("--replicas", type=int, help="replicas per (model, N); at least 3")
    r.add_argument("--models", help="comma-separated built-in model ids")
    r.add_argument("--workers", type=int, help="parallel worker processes")

    sub.add_parser("schema", help="print the config JSON schema")
    return parser


def _cmd_generate(args) -> int:
    data = generate_data(args.demo, args.n, args.sigma, args.seed)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_csv_dataset(data, args.output)
    print(f"wrote {data.n} rows to {args.output}")
    return 0


def _cmd_surrogate(args) -> int:
    lams, outputs = load_training_csv(args.training)
    ranges = args.ranges
    if ranges is None:
        ranges = np.column_stack([lams.min(axis=0), lams.max(axis=0)])
    if ranges.shape[0] != lams.shape[1]:
        raise ValueError(f"--ranges gives {ranges.shape[0]} intervals for {lams.shape[1]} parameters")
    sur = build_surrogate(lams, outputs, args.order, ranges)
    atomic_write_text(args.output, sur.to_text())
    loo = sur.loo_errors
    print(f"surrogate: {sur.n_locations} locations, {sur.basis.size} terms; "
          f"LOO rms min {loo.min():.3g} median {np.median(loo):.3g} max {loo.max():.3g}")
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _load(args)
    out = cfg.output_dir(args.output)
    rec = run_calibration(cfg, out)
    print(json.dumps({"output": str(out), **rec["variance_averages"],
                      "acceptance_rate": rec["acceptance_rate"]}, sort_keys=True))
    return 0


def _cmd_predict(args) -> int:
    cfg = _load(args)
    out = cfg.output_dir(args.output)
    pred = run_prediction(cfg, args.chain, out / "predictions.csv", args.mode)
    write_json(pred.averages(), out / "prediction_summary.json")
    print(f"wrote {len(pred)} predictions to {out / 'predictions.csv'}")
    return 0


def _cmd_replicas(args) -> int:
    cfg = _load(args)
    out = cfg.output_dir(args.output)
    models = args.models.split(",") if args.models else None
    table = run_replicas(cfg, args.n_values, args.replicas, models, args.workers,
                         cfg.steps, out)
    sys.stdout.write(table.to_csv())
    for f in table.failures:
        print(f"replica failed: model={f['model']} N={f['N']} replica={f['replica']}: {f['error']}",
              file=sys.stderr)
    return 1 if table.failures else 0


COMMANDS = {
    "generate": _cmd_generate,
    "surrogate": _cmd_surrogate,
    "calibrate": _cmd_calibrate,
    "predict": _cmd_predict,
    "replicas": _cmd_replicas,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(dump_schema())
        return 0
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DataFormatError, IllPosedDesignError, FileNotFoundError, ValueError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
