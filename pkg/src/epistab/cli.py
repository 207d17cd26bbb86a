"""Command-line front end.

Subcommands: sweep-b1, sweep-b2, ablate, gain-control, deltas, calib,
report.  Every output CSV is byte-identical across repeated invocations
with the same configuration.
"""

import argparse
import sys
from pathlib import Path

from . import calibration, deltas, io, sweeps
from .exceptions import EpistabError

__all__ = ["main", "build_parser"]

PREFIX = {"B1_alpha_ray": "b1", "B2_epsilon": "b2"}


def _add_common(p):
    p.add_argument("--config", type=Path, default=None,
                   help="flat key=value config file ('#' comments)")
    p.add_argument("--seed", type=int, default=None,
                   help="single run seed (replaces the seed list)")
    p.add_argument("--seeds", type=str, default=None,
                   help="comma-separated run seeds")
    p.add_argument("--out", type=Path, default=Path("out"),
                   help="output directory (default: out/)")
    p.add_argument("--quantile", type=float, default=None,
                   help="tail NIS quantile (default 0.99)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="epistab",
        description="Closed-loop instability sweeps and calibration analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, kind in (("sweep-b1", "B1_alpha_ray"),
                       ("sweep-b2", "B2_epsilon")):
        p = sub.add_parser(name, help=f"run the {kind} sweep")
        _add_common(p)
        p.set_defaults(func=_cmd_sweep, kind=kind)

    p = sub.add_parser("ablate", help="sweep plus single-factor ablations")
    _add_common(p)
    p.add_argument("--kind", choices=sorted(PREFIX), default="B2_epsilon")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser(
        "gain-control", help="fixed_ref vs dare_per_config comparison"
    )
    _add_common(p)
    p.set_defaults(func=_cmd_gain_control)

    p = sub.add_parser("deltas", help="paired condition-delta analysis")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--baseline", default="C0")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--n-boot", type=int, default=1000)
    p.add_argument("--boot-seed", type=int, default=12345)
    p.set_defaults(func=_cmd_deltas)

    p = sub.add_parser("calib", help="calibration metrics over predictions")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--mode", choices=("equal_frequency", "equal_width"),
                   default="equal_frequency")
    p.add_argument("--debias", action="store_true")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=_cmd_calib)

    p = sub.add_parser("report", help="summary stats from a results CSV")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--n-boot", type=int, default=1000)
    p.add_argument("--boot-seed", type=int, default=12345)
    p.set_defaults(func=_cmd_report)

    return parser


def _resolve(kind, args, extra=None):
    overrides = {}
    if args.config is not None:
        overrides.update(io.parse_config(args.config))
    overrides.update(extra or {})
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.seed is not None:
        overrides["seeds"] = str(args.seed)
    if args.quantile is not None:
        overrides["quantile"] = str(args.quantile)
    return sweeps.resolve_config(kind, overrides)


def _emit_pair(out_dir, prefix, spec, result, summaries=None, suffix=""):
    meta = sweeps.results_metadata(spec, result)
    rows = [r.as_dict() for r in result.rows]
    results_path = out_dir / f"{prefix}{suffix}_results.csv"
    summary_path = out_dir / f"{prefix}{suffix}_summary_stats.csv"
    io.write_csv(results_path, io.RESULTS_COLUMNS, rows, meta)
    io.write_csv(summary_path, io.SUMMARY_COLUMNS,
                 summaries if summaries is not None else result.summaries,
                 meta)
    return results_path, summary_path


def _cmd_sweep(args):
    cfg = _resolve(args.kind, args)
    spec = sweeps.build_spec(cfg)
    result = sweeps.run_sweep(spec)
    paths = _emit_pair(args.out, PREFIX[args.kind], spec, result)
    for path in paths:
        print(path)
    return 0


def _cmd_ablate(args):
    cfg = _resolve(args.kind, args)
    spec = sweeps.build_spec(cfg, ablations=sweeps.SINGLE_ABLATIONS)
    result, by_label = sweeps.run_ablation(spec)
    prefix = PREFIX[args.kind]
    paths = list(_emit_pair(args.out, prefix, spec, result))
    ablation_rows = []
    for label in sorted(by_label):
        ablation_rows.extend(by_label[label])
    path = args.out / f"{prefix}_ablation_summary_stats.csv"
    io.write_csv(path, io.SUMMARY_COLUMNS, ablation_rows,
                 sweeps.results_metadata(spec, result))
    paths.append(path)
    for p in paths:
        print(p)
    return 0


def _slope_point(summary_rows, pair_label):
    for row in summary_rows:
        if (row["pair_label"] == pair_label
                and row["statistic"] == "theil_sen"):
            return row["point"]
    return None


def _cmd_gain_control(args):
    paths = []
    comparison = []
    slopes = {}
    for policy in ("fixed_ref", "dare_per_config"):
        cfg = _resolve("B2_epsilon", args, extra={"gain_policy": policy})
        spec = sweeps.build_spec(cfg)
        result = sweeps.run_sweep(spec)
        paths.extend(_emit_pair(args.out, "b2", spec, result,
                                suffix=f"_{policy}"))
        for row in result.summaries:
            tagged = dict(row)
            tagged["pair_label"] = f"{row['pair_label']}[{policy}]"
            comparison.append(tagged)
        for label in ("hrisk_vs_nis_mean", "log10_hrisk_vs_nis_mean"):
            slopes[(policy, label)] = _slope_point(result.summaries, label)
        meta = sweeps.results_metadata(spec, result)
    for label in ("hrisk_vs_nis_mean", "log10_hrisk_vs_nis_mean"):
        fixed = slopes.get(("fixed_ref", label))
        dare = slopes.get(("dare_per_config", label))
        ratio = None
        if fixed not in (None, 0.0) and dare is not None:
            ratio = dare / fixed
        comparison.append({
            "pair_label": label,
            "statistic": "theil_sen_slope_ratio_dare_over_fixed",
            "point": ratio, "ci_lo": None, "ci_hi": None,
            "method": "derived", "n": None, "n_boot": None, "seed": None,
        })
    path = args.out / "gain_control_summary_stats.csv"
    io.write_csv(path, io.SUMMARY_COLUMNS, comparison, meta)
    paths.append(path)
    for p in paths:
        print(p)
    return 0


def _cmd_deltas(args):
    summary_rows, long_rows, pooled, warnings = (
        deltas.analyze_condition_deltas(
            args.input, baseline=args.baseline, n_boot=args.n_boot,
            boot_seed=args.boot_seed,
        )
    )
    paths = deltas.write_delta_reports(
        args.out, summary_rows, long_rows, pooled, baseline=args.baseline
    )
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)
    for p in paths:
        print(p)
    return 0


def _cmd_calib(args):
    _, _, raw = io.read_csv(args.input, required=io.PREDICTION_COLUMNS)
    records = [
        calibration.binary_record(float(r["confidence"]),
                                  float(r["correct"]) > 0.5)
        for r in raw
    ]
    scheme = calibration.BinScheme(mode=args.mode, B=args.bins,
                                   debias=args.debias)
    rows = [
        {"metric": "ece", "value": calibration.ece(records, scheme)},
        {"metric": "mce", "value": calibration.mce(records, scheme)},
        {"metric": "brier", "value": calibration.brier(records)},
        {"metric": "log_loss", "value": calibration.log_loss(records)},
        {"metric": "n", "value": len(records)},
    ]
    meta = {
        "package": "epistab-0.1.0",
        "bins": args.bins, "mode": args.mode,
        "debias": io.format_value(args.debias),
        "binary_encoding": "probs=(confidence, 1-confidence)",
    }
    path = args.out / "calibration_metrics.csv"
    io.write_csv(path, ["metric", "value"], rows, meta)
    for row in rows:
        print(f"{row['metric']}={io.format_value(row['value'])}")
    print(path)
    return 0


def _cmd_report(args):
    rows, metadata = io.load_results_csv(args.input)
    summary = sweeps.summaries_from_rows(
        rows, n_boot=args.n_boot, boot_seed=args.boot_seed
    )
    meta = {"package": "epistab-0.1.0", "source": args.input.name}
    meta.update({k: v for k, v in metadata.items() if k.startswith("config.")})
    path = args.out / "report_summary_stats.csv"
    io.write_csv(path, io.SUMMARY_COLUMNS, summary, meta)
    print(path)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EpistabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
