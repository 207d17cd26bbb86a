"""Figure builders: stability map, dual plot, forest plot.

Every statistic drawn (slopes, intercepts, interval bounds) is read from
the input CSVs; nothing is re-estimated here.  Rendering is deterministic:
Agg backend, fixed style, no timestamps in the output files.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib import colors  # noqa: E402

from . import csvio  # noqa: E402

__all__ = ["FigureJob", "build_figure", "render"]

plt.rcParams["svg.hashsalt"] = "epifig"

_STYLE = {"figure.figsize": (8.0, 4.8), "figure.dpi": 110,
          "savefig.dpi": 110, "font.size": 9.0}

LOG_COLOR_RATIO = 100.0


@dataclass(frozen=True)
class FigureJob:
    """One rendering request."""

    kind: str  # stability_map | dual_plot | forest
    inputs: tuple
    out: Path
    metric: str = "brier"
    pair_label: str = "hrisk_vs_nis_mean"
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("stability_map", "dual_plot", "forest"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def build_figure(job):
    """Return ``(figure, aux)``; aux carries the drawn values for tests."""
    with plt.rc_context(_STYLE):
        if job.kind == "stability_map":
            return _stability_map(job)
        if job.kind == "dual_plot":
            return _dual_plot(job)
        return _forest(job)


def render(job):
    """Build and write the figure; returns the output path."""
    fig, _ = build_figure(job)
    out = Path(job.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower()
    if suffix == ".svg":
        fig.savefig(out, format="svg", metadata={"Date": None})
    elif suffix in (".png", ""):
        fig.savefig(out.with_suffix(".png") if suffix == "" else out,
                    format="png")
    else:
        raise ValueError(
            f"unsupported output format {suffix!r} (use .png or .svg)"
        )
    plt.close(fig)
    return out


def _stability_map(job):
    _, rows = csvio.load_results(job.inputs[0])
    seen = {}
    for r in rows:
        seen.setdefault(r["param_value"], r)  # one marker per grid point
    pts = sorted(seen.values(), key=lambda r: r["param_value"])
    rho = [p["rho"] for p in pts]
    kappa = [p["kappa"] for p in pts]
    hr = [p["hrisk"] for p in pts]
    lo, hi = min(hr), max(hr)
    degenerate = lo == hi
    log_scale = (not degenerate) and lo > 0 and hi / lo > LOG_COLOR_RATIO
    norm = (colors.LogNorm(vmin=lo, vmax=hi) if log_scale
            else colors.Normalize(vmin=lo, vmax=hi if hi > lo else lo + 1))
    fig, ax = plt.subplots()
    sc = ax.scatter(rho, kappa, c=hr, norm=norm, cmap="viridis", s=48,
                    edgecolor="black", linewidths=0.4)
    bar = fig.colorbar(sc, ax=ax)
    bar.set_label("instability index")
    ax.set_xlabel(job.style.get("xlabel", "spectral radius of the loop"))
    ax.set_ylabel(job.style.get("ylabel", "condition number of the loop"))
    title = "Epistemic stability map"
    if degenerate:
        title += "  [degenerate color range]"
    ax.set_title(title)
    aux = {"n_points": len(pts), "log_color": log_scale,
           "degenerate": degenerate, "color_range": (lo, hi)}
    return fig, aux


def _line_xy(xs, slope, intercept):
    x0, x1 = min(xs), max(xs)
    return [x0, x1], [intercept + slope * x0, intercept + slope * x1]


def _dual_plot(job):
    if len(job.inputs) < 2:
        raise csvio.SchemaError(
            "dual_plot needs the results CSV and the summary CSV"
        )
    _, rows = csvio.load_results(job.inputs[0])
    _, stats = csvio.load_summary(job.inputs[1], job.pair_label)
    needed = ["theil_sen", "theil_sen_intercept", "ols_slope",
              "ols_intercept"]
    missing = [s for s in needed if s not in stats]
    if missing:
        raise csvio.SchemaError(
            f"summary lacks statistics {missing} for {job.pair_label!r}"
        )
    metric = job.pair_label.rsplit("_vs_", 1)[1]
    xs = [r["hrisk"] for r in rows]
    ys = [r[metric] for r in rows]
    eps = [r["param_value"] for r in rows]

    fig, (left, right) = plt.subplots(1, 2)
    left.scatter(eps, xs, s=24, color="#29618c")
    left.set_xlabel(job.style.get("xlabel", "observation coupling"))
    left.set_ylabel("instability index")
    if min(xs) > 0 and max(xs) / min(xs) > LOG_COLOR_RATIO:
        left.set_yscale("log")
    if job.style.get("log_x"):
        left.set_xscale("log")
    left.set_title("index across the sweep")

    right.scatter(xs, ys, s=24, color="#29618c", label="runs")
    ts = stats["theil_sen"]
    ols_xy = _line_xy(xs, stats["ols_slope"]["point"],
                      stats["ols_intercept"]["point"])
    ts_xy = _line_xy(xs, ts["point"], stats["theil_sen_intercept"]["point"])
    right.plot(*ols_xy, color="#b3482d", label="least squares")
    right.plot(*ts_xy, color="#2d6d33", linestyle="--", label="Theil-Sen")
    band = None
    if math.isfinite(ts["ci_lo"]) and math.isfinite(ts["ci_hi"]):
        # pivot the slope interval around the Theil-Sen line's midpoint
        mid_x = 0.5 * (min(xs) + max(xs))
        mid_y = stats["theil_sen_intercept"]["point"] + ts["point"] * mid_x
        grid = [min(xs), max(xs)]
        lo_line = [mid_y + ts["ci_lo"] * (x - mid_x) for x in grid]
        hi_line = [mid_y + ts["ci_hi"] * (x - mid_x) for x in grid]
        band = (grid, lo_line, hi_line)
        right.fill_between(grid, [min(a, b) for a, b in zip(lo_line, hi_line)],
                           [max(a, b) for a, b in zip(lo_line, hi_line)],
                           color="#2d6d33", alpha=0.15,
                           label="slope 95% interval")
    right.set_xlabel("instability index")
    right.set_ylabel(metric.replace("_", " "))
    right.legend(loc="best")
    right.set_title("index vs miscalibration")
    fig.tight_layout()
    aux = {
        "n_points": len(rows),
        "ols_line": ols_xy,
        "theil_sen_line": ts_xy,
        "band": band,
        "ols_slope": stats["ols_slope"]["point"],
        "theil_sen_slope": ts["point"],
    }
    return fig, aux


def _forest(job):
    _, rows = csvio.load_deltas_summary(job.inputs[0], job.metric)
    fig, ax = plt.subplots(figsize=(6.4, 1.2 + 0.7 * len(rows)))
    ys = list(range(len(rows)))[::-1]
    for y, row in zip(ys, rows):
        lo = row["mean_delta"] - row["ci_lo"]
        hi = row["ci_hi"] - row["mean_delta"]
        ax.errorbar(
            row["mean_delta"], y, xerr=[[lo], [hi]], fmt="o",
            color="#29618c", ecolor="#29618c", capsize=4,
        )
    ax.axvline(0.0, color="black", linewidth=0.9)
    ax.set_yticks(ys)
    ax.set_yticklabels([r["condition"] for r in rows])
    ax.set_xlabel(job.style.get(
        "xlabel", f"mean {job.metric} delta vs baseline (95% interval)"
    ))
    ax.set_title("Paired condition deltas")
    fig.tight_layout()
    aux = {
        "conditions": [r["condition"] for r in rows],
        "deltas": [r["mean_delta"] for r in rows],
        "ci": [(r["ci_lo"], r["ci_hi"]) for r in rows],
    }
    return fig, aux
