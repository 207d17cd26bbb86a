"""Command line: ``epifig render --kind ... --in ... --out ...``."""

import argparse
import sys
from pathlib import Path

from . import csvio
from .render import FigureJob, render

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="epifig", description="Render figures from sweep/delta CSVs"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--kind", required=True,
                   choices=("stability_map", "dual_plot", "forest"))
    p.add_argument("--in", dest="input", type=Path, required=True,
                   help="results CSV (stability_map, dual_plot) or "
                        "deltas summary CSV (forest)")
    p.add_argument("--in2", dest="input2", type=Path, default=None,
                   help="summary CSV with the regression statistics "
                        "(dual_plot)")
    p.add_argument("--out", type=Path, required=True,
                   help="output path; .png (raster) or .svg (vector)")
    p.add_argument("--metric", default="brier",
                   help="deltas metric for the forest plot")
    p.add_argument("--pair-label", default="hrisk_vs_nis_mean",
                   help="summary pair label for the dual plot")
    p.add_argument("--xlabel", default=None)
    p.add_argument("--ylabel", default=None)
    p.add_argument("--log-x", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    inputs = (args.input,) if args.input2 is None else (args.input,
                                                        args.input2)
    style = {k: v for k, v in (
        ("xlabel", args.xlabel), ("ylabel", args.ylabel),
        ("log_x", args.log_x or None),
    ) if v}
    job = FigureJob(kind=args.kind, inputs=inputs, out=args.out,
                    metric=args.metric, pair_label=args.pair_label,
                    style=style)
    try:
        out = render(job)
    except (csvio.SchemaError, csvio.EmptyDataError, ValueError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
