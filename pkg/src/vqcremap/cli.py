"""Command-line entry point.

Subcommands: run, aggregate, gradcheck, plot, fetch-data. Exit codes:
0 success, 1 usage or I/O error, 2 numerical-invariant breach.

Config precedence for `run`: built-in dataset defaults < --config JSON
file < command-line flags. The effective configuration is recorded in
each run's manifest.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .data import DatasetIntegrityError, SCHEMAS, fetch_dataset
from .experiments import (
    DEFAULT_SEED_COUNT,
    ExperimentPlan,
    aggregate,
    format_aggregate_table,
    gradcheck,
    plot_curves,
    run_plan,
    write_aggregate_csv,
)
from .remap import RemapKind, remap_from_name

DATA_DIR_ENV = "VQCREMAP_DATA_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_seeds(text: str) -> list[int]:
    """Either a range '0..19' (inclusive) or a comma list '0,3,7'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(s) for s in text.split(",") if s.strip() != ""]


def parse_remaps(text: str) -> list[RemapKind]:
    if text.strip().lower() == "all":
        return list(RemapKind)
    return [remap_from_name(name) for name in text.split(",") if name.strip()]


def default_data_dir(value: str | None) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def build_parser() -> _Parser:
    parser = _Parser(prog="vqcremap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train a sweep of (remap, seed) runs")
    p_run.add_argument("--dataset", required=True, choices=SCHEMAS)
    p_run.add_argument("--remap", default="all", help="comma list or 'all'")
    p_run.add_argument("--seeds", default=None, help="range '0..19' or comma list")
    p_run.add_argument("--epochs", type=int, default=None)
    p_run.add_argument("--lr", type=float, default=None)
    p_run.add_argument("--weight-decay", type=float, default=None)
    p_run.add_argument("--batch-size", type=int, default=None)
    p_run.add_argument("--layers", type=int, default=None)
    p_run.add_argument("--embedding-axis", choices=("x", "y"), default=None)
    p_run.add_argument("--config", default=None, help="JSON file with overrides")
    p_run.add_argument("--out", default="runs")
    p_run.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_run.add_argument("--data-dir", default=None)

    p_agg = sub.add_parser("aggregate", help="mean +- 95% CI tables from metrics")
    p_agg.add_argument("files", nargs="+")
    p_agg.add_argument(
        "--at-samples", default="", help="comma list of samples-seen checkpoints"
    )
    p_agg.add_argument("--out", default=None, help="also write the table as CSV")

    p_grad = sub.add_parser("gradcheck", help="adjoint vs shift vs finite difference")
    p_grad.add_argument("--instances", type=int, default=50)
    p_grad.add_argument("--fd-instances", type=int, default=20)
    p_grad.add_argument("--max-qubits", type=int, default=4)
    p_grad.add_argument("--max-layers", type=int, default=3)
    p_grad.add_argument("--seed", type=int, default=12345)
    p_grad.add_argument(
        "--corrupt",
        type=float,
        default=0.0,
        help="fault-injection offset added to deviations (testing hook)",
    )

    p_plot = sub.add_parser("plot", help="validation curves with CI bands")
    p_plot.add_argument("files", nargs="+")
    p_plot.add_argument("--out", default="plots")

    p_fetch = sub.add_parser("fetch-data", help="download/materialize UCI files")
    p_fetch.add_argument("--dataset", default="all", choices=SCHEMAS + ("all",))
    p_fetch.add_argument("--data-dir", default=None)

    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.config:
        with open(args.config) as fh:
            overrides.update(json.load(fh))
    flag_map = {
        "epochs": "n_epochs",
        "lr": "learning_rate",
        "weight_decay": "weight_decay",
        "batch_size": "batch_size",
        "layers": "n_layers",
        "embedding_axis": "embedding_axis",
    }
    for flag, key in flag_map.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value

    seeds = (
        parse_seeds(args.seeds)
        if args.seeds is not None
        else list(range(DEFAULT_SEED_COUNT[args.dataset]))
    )
    plan = ExperimentPlan(
        dataset=args.dataset,
        remap_kinds=parse_remaps(args.remap),
        seeds=seeds,
        output_dir=Path(args.out),
        overrides=overrides,
    )
    results = run_plan(plan, default_data_dir(args.data_dir), jobs=args.jobs)
    failures = [r for r in results if not r.ok]
    for r in results:
        if r.ok:
            print(f"{r.run_id}: final val_accuracy {r.final_val_accuracy:.4f}")
        else:
            print(f"{r.run_id}: FAILED ({r.error})", file=sys.stderr)
    print(f"{len(results) - len(failures)}/{len(results)} runs completed")
    return EXIT_OK if not failures else EXIT_USAGE


def _cmd_aggregate(args) -> int:
    at_samples = [int(s) for s in args.at_samples.split(",") if s.strip()]
    rows = aggregate(args.files, at_samples)
    print(format_aggregate_table(rows))
    if args.out:
        write_aggregate_csv(args.out, rows)
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    report = gradcheck(
        n_instances=args.instances,
        fd_instances=args.fd_instances,
        max_qubits=args.max_qubits,
        max_layers=args.max_layers,
        seed=args.seed,
        corrupt=args.corrupt,
    )
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_INVARIANT


def _cmd_plot(args) -> int:
    png_path, csv_path = plot_curves(args.files, args.out)
    print(f"wrote {png_path}\nwrote {csv_path}")
    return EXIT_OK


def _cmd_fetch(args) -> int:
    names = list(SCHEMAS) if args.dataset == "all" else [args.dataset]
    for name in names:
        path = fetch_dataset(name, default_data_dir(args.data_dir))
        print(f"{name}: {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": _cmd_run,
        "aggregate": _cmd_aggregate,
        "gradcheck": _cmd_gradcheck,
        "plot": _cmd_plot,
        "fetch-data": _cmd_fetch,
    }
    try:
        return handlers[args.command](args)
    except (DatasetIntegrityError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"vqcremap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
