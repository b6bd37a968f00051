"""Command line front end: dataset statistics, rewiring with diagnostics,
and full experiment runs.

Exit codes: 0 success, 2 input error, 3 budget exceeded (OOR),
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys

import numpy as np

from .curvature import (curvature_delta, curvature_distribution,
                        write_delta_csv, write_histogram_csv)
from .datasets import load_dataset
from .errors import BudgetExceeded, InputError
from .evaluation import (ExperimentReport, GraphTask, NodeTask, SearchSpace,
                         model_select, significance)
from .graph import Graph, dataset_stats
from .rewiring import (METHODS, Normalization, RewireConfig, apply_rewiring,
                       write_edit_log)
from .spectral import spectral_gap

log = logging.getLogger(__name__)


def _config_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _write_manifest(out_dir: str, config: dict, artifacts: list[str]) -> None:
    manifest = {"config": config, "config_hash": _config_hash(config),
                "artifacts": sorted(artifacts)}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_task(path: str, fmt: str):
    data = load_dataset(path, fmt)
    name = os.path.basename(os.path.normpath(path))
    if isinstance(data, Graph):
        metric = "accuracy"
        if data.labels is not None and len(np.unique(data.labels)) == 2:
            counts = np.bincount(data.labels - data.labels.min())
            if counts.min() / max(counts.max(), 1) < 0.5:
                metric = "auroc"   # unbalanced binary node task
        return NodeTask(graph=data, metric=metric, name=name)
    graphs, labels = data
    return GraphTask(graphs=graphs, labels=labels, name=name)


def _rewire_config(args) -> RewireConfig:
    return RewireConfig(
        method=args.rewire, t=args.t, alpha=args.alpha,
        iteration_fraction=args.fraction, tau=args.tau, seed=args.seed,
        diffusion_norm=Normalization(args.diffusion_norm),
        budget_seconds=args.budget_seconds)


def cmd_stats(args) -> int:
    data = load_dataset(args.dataset, args.format)
    if isinstance(data, Graph):
        stats = dataset_stats(data)
    else:
        stats = dataset_stats(data[0])
        if data[1] is not None:
            stats.num_classes = len(np.unique(data[1]))
    rows = [("graphs", stats.num_graphs),
            ("nodes", f"{stats.nodes:g}"),
            ("edges", f"{stats.edges:g}"),
            ("average_degree", f"{stats.average_degree:.2f}"),
            ("diameter", f"{stats.diameter:.2f}"),
            ("node_features", stats.num_features),
            ("classes", stats.num_classes),
            ("edge_homophily",
             "n/a" if stats.edge_homophily is None
             else f"{stats.edge_homophily:.2f}")]
    for key, val in rows:
        print(f"{key:16s} {val}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "stats.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["field", "value"])
            w.writerows(rows)
        _write_manifest(args.out, {"command": "stats", "dataset": args.dataset,
                                   "format": args.format}, ["stats.csv"])
    return 0


def cmd_rewire(args) -> int:
    data = load_dataset(args.dataset, args.format)
    if not isinstance(data, Graph):
        raise InputError("rewire command expects a single-graph dataset")
    g = data
    config = _rewire_config(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        rewired = apply_rewiring(g, config)
    except BudgetExceeded:
        with open(os.path.join(args.out, "OOR"), "w") as fh:
            fh.write(f"method {config.method} exceeded {config.budget_seconds}s\n")
        raise

    artifacts = []
    if rewired.operator is not None:
        np.save(os.path.join(args.out, "kernel.npy"), rewired.operator)
        artifacts.append("kernel.npy")
    edges_path = os.path.join(args.out, "rewired_edges.tsv")
    with open(edges_path, "w") as fh:
        for u, v in rewired.graph.edges:
            fh.write(f"{u}\t{v}\n")
    artifacts.append("rewired_edges.tsv")
    write_edit_log(rewired.edit_log, os.path.join(args.out, "edit_log.tsv"))
    artifacts.append("edit_log.tsv")

    write_histogram_csv(curvature_distribution(g),
                        os.path.join(args.out, "curvature_before.csv"))
    write_histogram_csv(curvature_distribution(rewired.graph),
                        os.path.join(args.out, "curvature_after.csv"))
    delta = curvature_delta(g, rewired.graph)
    write_delta_csv(delta, os.path.join(args.out, "curvature_delta.csv"))
    artifacts += ["curvature_before.csv", "curvature_after.csv",
                  "curvature_delta.csv"]

    with open(os.path.join(args.out, "spectral.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gap_before", "gap_after"])
        w.writerow([f"{spectral_gap(g):.10g}",
                    f"{spectral_gap(rewired.graph):.10g}"])
    artifacts.append("spectral.csv")

    _write_manifest(args.out, {"command": "rewire", "dataset": args.dataset,
                               "format": args.format,
                               "rewire": config.__dict__}, artifacts)
    print(f"rewired with {config.method}: |E| {g.num_edges} -> "
          f"{rewired.graph.num_edges}; {len(delta.edges)} common edges, "
          f"{delta.worsened} with negative curvature delta")
    return 0


def _write_report_csv(report: ExperimentReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fold", "metric", "val_metric", "selected"])
        for f in report.folds:
            w.writerow([f.fold, f"{f.metric:.10g}", f"{f.val_metric:.10g}",
                        json.dumps(f.selected, sort_keys=True)])


def cmd_run(args) -> int:
    task = _load_task(args.dataset, args.format)
    config = _rewire_config(args)
    space = {"tiny": SearchSpace.tiny(), "default": SearchSpace(),
             "full": SearchSpace.full()}[args.grid]
    os.makedirs(args.out, exist_ok=True)
    artifacts = []

    report = model_select(task, args.model, config, space, seed=args.seed,
                          budget_seconds=args.budget_seconds, jobs=args.jobs)
    _write_report_csv(report, os.path.join(args.out, "report.csv"))
    artifacts.append("report.csv")

    lines = []
    marker = ""
    if config.method != "baseline" and not report.oor:
        base = model_select(task, args.model, RewireConfig(seed=args.seed),
                            space, seed=args.seed,
                            budget_seconds=args.budget_seconds, jobs=args.jobs)
        _write_report_csv(base, os.path.join(args.out, "baseline_report.csv"))
        artifacts.append("baseline_report.csv")
        p, flag = significance([f.metric for f in base.folds],
                               [f.metric for f in report.folds])
        marker = {"better": " (+)", "worse": " (-)", "none": ""}[flag]
        lines.append(f"baseline  {args.model}  {task.name}  "
                     f"{100 * base.mean:.2f} +/- {100 * base.std:.2f}")
        lines.append(f"significance p={p:.4g}{marker or ' (none)'}")
    if report.oor:
        lines.append(f"{config.method}  {args.model}  {task.name}  OOR")
    else:
        lines.append(f"{config.method}  {args.model}  {task.name}  "
                     f"{100 * report.mean:.2f} +/- {100 * report.std:.2f}"
                     f"{marker}")
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(summary)
    artifacts.append("summary.txt")
    with open(os.path.join(args.out, "timing.txt"), "w") as fh:
        fh.write(f"wall_clock_seconds {report.wall_clock:.3f}\n")
    artifacts.append("timing.txt")

    _write_manifest(args.out, {
        "command": "run", "dataset": args.dataset, "format": args.format,
        "model": args.model, "rewire": config.__dict__, "grid": args.grid,
        "seed": args.seed}, artifacts)
    print(summary, end="")
    return 3 if report.oor else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rewirebench",
        description="Graph rewiring benchmark with training-free models")
    parser.add_argument("--config", help="key=value config file (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dataset", required=True)
        p.add_argument("--format", choices=("canonical", "tudataset"),
                       default="canonical")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
        p.add_argument("--budget-seconds", type=float, default=3600.0)
        p.add_argument("--out", default=None)

    def rewire_opts(p):
        p.add_argument("--rewire", choices=METHODS, default="baseline")
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--alpha", type=float, default=0.1)
        p.add_argument("--fraction", type=float, default=0.1)
        p.add_argument("--tau", type=float, default=0.5)
        p.add_argument("--diffusion-norm", default="rw",
                       choices=[n.value for n in Normalization])

    p_stats = sub.add_parser("stats", help="dataset statistics table")
    common(p_stats)

    p_rw = sub.add_parser("rewire", help="rewire a graph and emit diagnostics")
    common(p_rw)
    rewire_opts(p_rw)
    p_rw.set_defaults(out="rewire_out")

    p_run = sub.add_parser("run", help="full evaluation pipeline")
    common(p_run)
    rewire_opts(p_run)
    p_run.add_argument("--model", choices=("sgc", "gesn"), default="sgc")
    p_run.add_argument("--grid", choices=("tiny", "default", "full"),
                       default="default")
    p_run.set_defaults(out="run_out")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    defaults = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, val = line.partition("=")
                defaults[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    parser.set_defaults(**defaults)
    # subparser argument defaults shadow the top-level ones, so push the
    # config values down to every subcommand as well
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                sub.set_defaults(**defaults)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        # config-file values arrive as strings; coerce the numeric ones
        for field_name, typ in (("seed", int), ("jobs", int), ("t", float),
                                ("alpha", float), ("fraction", float),
                                ("tau", float), ("budget_seconds", float)):
            if hasattr(args, field_name):
                setattr(args, field_name, typ(getattr(args, field_name)))
        if args.command == "stats":
            return cmd_stats(args)
        if args.command == "rewire":
            return cmd_rewire(args)
        return cmd_run(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # internal invariant violation
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
