"""granod command line: detect, views, inject, eval, stats.

Reports are ``key: value`` lines; tabular artifacts are CSV (ROC points TSV).
Any library or I/O error ends the run with exit status 1 and one line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .balls import generate_views, view_records
from .dataset import DataError, InjectionSpec, inject_outliers, inlier_pool, load_dataset, normalize, write_csv
from .evaluation import RankTable, auroc, default_grid, friedman_statistic, metric_report, nemenyi_cd
from .fusion import PipelineConfig, run_pipeline


class CliError(Exception):
    pass


def _emit(lines, path):
    text = "".join(f"{k}: {v}\n" for k, v in lines)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _load(args):
    return load_dataset(args.input, args.schema)


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(delta=args.delta, lam=args.lam, contamination=args.contamination,
                          delta_tw=args.tw_delta, c_minus=args.c_minus, seed=args.seed)


def cmd_detect(args) -> int:
    cfg = _pipeline_config(args)
    ds = _load(args)
    started = time.perf_counter()
    result = run_pipeline(ds, cfg)
    elapsed = time.perf_counter() - started

    state = result.state
    regions = state.region_labels()
    with open(args.scores, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "fused", "final", "region"])
        for i in range(ds.n):
            w.writerow([i, repr(float(state.fused[i])), repr(float(result.final[i])), regions[i]])

    report = [
        ("input", args.input),
        ("samples", ds.n),
        ("attributes", ds.m),
        ("delta", cfg.delta),
        ("lambda", cfg.lam),
        ("contamination", cfg.contamination),
        ("tw_delta", cfg.delta_tw),
        ("c_minus", cfg.c_minus),
        ("seed", cfg.seed),
        ("views", len(result.hierarchy)),
        ("view_weights", " ".join(_fmt(v.view_weight) for v in state.per_view)),
        ("alpha", _fmt(state.alpha)),
        ("beta", _fmt(state.beta)),
        ("pos", state.pos.size),
        ("bnd", state.bnd.size),
        ("neg", state.neg.size),
        ("refined", "no" if result.fell_back else "yes"),
        ("wall_seconds", f"{elapsed:.3f}"),
    ]
    if ds.labels is not None and 0 < ds.labels.sum() < ds.n:
        report.append(("auroc_fused", _fmt(auroc(state.fused, ds.labels))))
        report.append(("auroc", _fmt(auroc(result.final, ds.labels))))
    report.append(("warnings", "; ".join(result.warnings) or "none"))
    _emit(report, args.report)
    return 0


def cmd_views(args) -> int:
    ds = normalize(_load(args))
    hierarchy = generate_views(ds, args.delta)
    out = sys.stdout if args.dump in (None, "-") else open(args.dump, "w", encoding="utf-8")
    try:
        for view in hierarchy:
            for rec in view_records(view, ds):
                out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    report = [("samples", ds.n), ("hierarchy_length", len(hierarchy)),
              ("balls_per_level", " ".join(str(len(v)) for v in hierarchy))]
    # with the dump on stdout the report goes to stderr so the dump stays parseable
    if args.dump in (None, "-"):
        sys.stderr.write("".join(f"{k}: {v}\n" for k, v in report))
    else:
        _emit(report, None)
    return 0


def cmd_inject(args) -> int:
    spec = InjectionSpec(args.kind, args.ratio, args.seed, args.alpha)
    ds = inlier_pool(normalize(_load(args)))
    out = inject_outliers(ds, spec)
    write_csv(out, args.output)
    _emit([("inliers", ds.n), ("injected", out.n - ds.n), ("kind", spec.kind), ("seed", spec.seed),
           ("output", args.output)], None)
    return 0


def _read_column(path, column):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise CliError(f"file not found: {path}") from None
    if not rows or column not in rows[0]:
        raise CliError(f"{path}: no column {column!r}")
    return [r[column] for r in rows]


def cmd_eval(args) -> int:
    try:
        scores = np.array([float(x) for x in _read_column(args.scores, args.column)])
    except ValueError as exc:
        raise CliError(f"{args.scores}: {exc}") from None
    labels = load_dataset(args.labels, args.schema).labels if args.schema else None
    if labels is None:
        labels = np.array([int(float(x)) for x in _read_column(args.labels, "label")])
    if labels.size != scores.size:
        raise CliError(f"{scores.size} scores but {labels.size} labels")
    ts = default_grid() if not args.t else [float(t) for t in args.t.split(",")]
    rep = metric_report(scores, labels, ts)
    lines = [(f"t={t:g}", f"precision={p:.4f} recall={r:.4f}") for t, p, r in rep.pr_curve]
    lines.append(("auroc", _fmt(rep.auroc)))
    if args.roc:
        with open(args.roc, "w", encoding="utf-8") as fh:
            fh.write("fpr\ttpr\n")
            fh.writelines(f"{f!r}\t{t!r}\n" for f, t in rep.roc_points)
        lines.append(("roc", args.roc))
    _emit(lines, None)
    return 0


def read_table(path):
    """Dataset rows x method columns; first column holds the dataset names."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except FileNotFoundError:
        raise CliError(f"file not found: {path}") from None
    if len(rows) < 3:
        raise CliError(f"{path}: need a header and at least two dataset rows")
    methods = [h.strip() for h in rows[0][1:]]
    names, cells = [], []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(methods) + 1:
            raise CliError(f"{path}: row {lineno} has {len(row)} cells, expected {len(methods) + 1}")
        vals = []
        for col, cell in enumerate(row[1:], 2):
            try:
                vals.append(float(cell))
            except ValueError:
                raise CliError(f"{path}: row {lineno}, column {col}: cannot parse {cell!r}") from None
        names.append(row[0].strip())
        cells.append(vals)
    return methods, names, np.array(cells)


def cmd_stats(args) -> int:
    methods, names, cells = read_table(args.table)
    if args.kind == "auroc":
        table = RankTable.from_scores(methods, names, cells)
    else:
        table = RankTable(methods, names, cells)
    chi2, tau_f = friedman_statistic(table)
    lines = [(f"avg_rank[{m}]", f"{r:.4f}") for m, r in zip(methods, table.average_ranks)]
    lines += [("methods", len(methods)), ("datasets", len(names)),
              ("tau_chi2", f"{chi2:.4f}"), ("tau_F", f"{tau_f:.4f}")]
    if args.q_phi is not None:
        lines.append(("cd", f"{nemenyi_cd(len(methods), len(names), args.q_phi):.4f}"))
    _emit(lines, None)
    return 0


def _add_data_args(p, schema_required=False):
    p.add_argument("input", help="CSV file with a header row")
    p.add_argument("--schema", required=schema_required,
                   help="sidecar of 'column: nominal|numerical|label|ignore' lines")


def _add_pipeline_args(p):
    p.add_argument("--delta", type=float, required=True, help="similarity threshold (eps = std / delta)")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="relative-density weight")
    p.add_argument("--contamination", type=float, required=True, help="assumed outlier fraction t")
    p.add_argument("--tw-delta", type=float, default=0.7, help="three-way threshold spread (default 0.7)")
    p.add_argument("--c-minus", type=float, default=1.0, help="SVM penalty for inliers (default 1.0)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granod", description="Multi-scale fuzzy granule outlier detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="score every sample")
    _add_data_args(p)
    _add_pipeline_args(p)
    p.add_argument("--scores", required=True, help="per-sample output CSV")
    p.add_argument("--report", default=None, help="report path (default stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("views", help="dump the granular-ball hierarchy, one JSON record per ball")
    _add_data_args(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--dump", default=None, help="records path (default stdout)")
    p.set_defaults(func=cmd_views)

    p = sub.add_parser("inject", help="append synthetic outliers to the inliers of a dataset")
    _add_data_args(p)
    p.add_argument("--kind", choices=("local", "global", "group"), required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=5.0, help="spread factor of the injected rows")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("eval", help="precision/recall over a t grid, AUROC and ROC points")
    p.add_argument("scores", help="CSV holding a score column")
    p.add_argument("labels", help="CSV holding a 'label' column (or any dataset with --schema)")
    p.add_argument("--column", default="final")
    p.add_argument("--schema", default=None)
    p.add_argument("--t", default=None, help="comma-separated fractions (default 0.05,...,1.0)")
    p.add_argument("--roc", default=None, help="write ROC points as TSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="Friedman and Nemenyi statistics for a method comparison table")
    p.add_argument("table", help="CSV, datasets x methods, first column the dataset name")
    p.add_argument("--kind", choices=("rank", "auroc"), default="rank",
                   help="cells are ranks already, or AUROC values to rank (higher is better)")
    p.add_argument("--q-phi", type=float, default=None, help="Tukey critical value for the CD")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DataError, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"granod {args.command}: error: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
