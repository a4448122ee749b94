"""Command-line entry point: ``pqfcredit {run,synth,project,report}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import StageError, ValidationError


def _cmd_run(args) -> int:
    from .experiment.config import ExperimentConfig
    from .experiment.report import emit_report
    from .experiment.runner import run_experiment

    cfg = ExperimentConfig.load(args.config)
    out = Path(args.output) if args.output else Path("runs") / cfg.name
    report = run_experiment(cfg)
    paths = emit_report(report, out)
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    print(f"wall time {report.provenance['wall_time_s']:.1f} s")
    return 0


def _cmd_synth(args) -> int:
    from .experiment.data import generate_synthetic, save_csv

    ds = generate_synthetic(args.m, args.features, args.positive_fraction, args.missing_fraction, args.seed)
    save_csv(ds, args.output)
    neg, pos = ds.class_counts()
    print(f"wrote {len(ds)} rows ({pos} positive, {neg} negative), {ds.num_features} features to {args.output}")
    return 0


def _cmd_project(args) -> int:
    from .experiment.config import ExperimentConfig
    from .experiment.report import write_pqf_csv
    from .experiment.runner import QuantumPipeline, prepare_data
    from .featuremap import FeatureMapSpec
    from .pqf import pqf_columns

    cfg = ExperimentConfig.load(args.config)
    qc = cfg.quantum
    if qc is None:
        raise ValidationError("config has no quantum section")
    if qc.backend == "shots":
        raise ValidationError("project supports the exact and mps backends")
    seed = qc.seeds[0]
    alpha = float(args.alpha) if args.alpha is not None else float(qc.alphas[0])
    train, test, _ = prepare_data(cfg)
    spec = FeatureMapSpec(qc.num_qubits, alpha, qc.repetitions, qc.haar_seed + seed, train.num_features)
    pipe = QuantumPipeline(
        spec, qc.backend, qc.scaler_range, (qc.shuffle_seed + seed) if qc.shuffle else None,
        qc.chi_max, qc.trunc_tol,
    ).fit_preprocessing(train.features)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    cols = pqf_columns(qc.num_qubits)
    for name, ds in (("train", train), ("test", test)):
        path = out / f"pqf_{name}.csv"
        write_pqf_csv(path, pipe.features(ds.features), cols, ds.labels, ds.weights)
        print(f"{name}: {path} ({len(ds)} rows, {len(cols)} PQF columns)")
    return 0


def _cmd_report(args) -> int:
    from .experiment.report import TABLES_TXT, load_report, render_tables

    payload = load_report(args.run_dir)
    text = render_tables(payload["body"])
    if args.write:
        Path(args.run_dir, TABLES_TXT).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    prov = payload.get("provenance", {})
    if prov:
        print(f"config hash {prov.get('config_hash')}, wall time {prov.get('wall_time_s', float('nan')):.1f} s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqfcredit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and write its report")
    p.add_argument("config", help="YAML experiment config")
    p.add_argument("-o", "--output", help="run directory (default runs/<name>)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="write a synthetic credit dataset as CSV")
    p.add_argument("--m", type=int, default=10000, help="number of rows")
    p.add_argument("--features", type=int, default=20)
    p.add_argument("--positive-fraction", type=float, default=0.2)
    p.add_argument("--missing-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="CSV path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("project", help="export projected quantum features of a config's data as CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--alpha", type=float, help="override the first alpha of the config")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("report", help="render the tables of a finished run")
    p.add_argument("run_dir")
    p.add_argument("--write", action="store_true", help="also rewrite tables.txt")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
