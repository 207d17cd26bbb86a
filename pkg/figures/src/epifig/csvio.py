"""Readers for the sweep-artifact CSV contract.

Files are comma-separated UTF-8 with '#'-prefixed ``key=value`` metadata
lines before the header; empty cells are missing values.  These readers
are the only coupling to the producing package — figures consume files,
never its code.
"""

import csv
import math
from pathlib import Path

RESULTS_COLUMNS = [
    "param_kind", "param_value", "seed", "rho", "kappa", "int_sens", "ia",
    "hrisk", "nis_mean", "nis_q", "gated_fraction", "stable_flag",
]
SUMMARY_COLUMNS = [
    "pair_label", "statistic", "point", "ci_lo", "ci_hi", "method", "n",
    "n_boot", "seed",
]
DELTAS_SUMMARY_COLUMNS = [
    "condition", "metric", "n_pairs", "mean_delta", "ci_lo", "ci_hi",
    "method", "n_boot", "seed",
]


class SchemaError(ValueError):
    """Input CSV does not match the expected column contract."""


class EmptyDataError(ValueError):
    """Input CSV parsed but carries no usable rows."""


def read_csv(path, required):
    """Return ``(metadata, rows)``; raise SchemaError on missing columns."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    metadata = {}
    start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            break
        start = i + 1
        key, _, value = line[1:].strip().partition("=")
        if key:
            metadata[key.strip()] = value
    body = lines[start:]
    if not body or not body[0].strip():
        raise SchemaError(f"{path}: missing header row")
    reader = csv.reader(body)
    fieldnames = next(reader)
    missing = [c for c in required if c not in fieldnames]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    rows = [dict(zip(fieldnames, values)) for values in reader if values]
    return metadata, rows


def as_float(cell):
    if cell is None or cell == "":
        return math.nan
    return float(cell)


def load_results(path):
    """Stable sweep rows with numeric fields parsed."""
    metadata, raw = read_csv(path, RESULTS_COLUMNS)
    rows = []
    for r in raw:
        if r["stable_flag"] != "1":
            continue
        rows.append({
            "param_value": as_float(r["param_value"]),
            "rho": as_float(r["rho"]),
            "kappa": as_float(r["kappa"]),
            "hrisk": as_float(r["hrisk"]),
            "nis_mean": as_float(r["nis_mean"]),
            "nis_q": as_float(r["nis_q"]),
            "seed": int(r["seed"]),
        })
    if not rows:
        raise EmptyDataError(f"{path}: no stable rows to draw")
    return metadata, rows


def load_summary(path, pair_label):
    """Statistics for one pair label, keyed by statistic name."""
    metadata, raw = read_csv(path, SUMMARY_COLUMNS)
    stats = {}
    for r in raw:
        if r["pair_label"] != pair_label:
            continue
        stats[r["statistic"]] = {
            "point": as_float(r["point"]),
            "ci_lo": as_float(r["ci_lo"]),
            "ci_hi": as_float(r["ci_hi"]),
            "method": r["method"],
        }
    if not stats:
        raise EmptyDataError(
            f"{path}: no rows with pair_label={pair_label!r}"
        )
    return metadata, stats


def load_deltas_summary(path, metric):
    """Per-condition mean deltas with CI bounds for one metric."""
    metadata, raw = read_csv(path, DELTAS_SUMMARY_COLUMNS)
    rows = []
    for r in raw:
        if r["metric"] != metric:
            continue
        rows.append({
            "condition": r["condition"],
            "mean_delta": as_float(r["mean_delta"]),
            "ci_lo": as_float(r["ci_lo"]),
            "ci_hi": as_float(r["ci_hi"]),
        })
    if not rows:
        raise EmptyDataError(f"{path}: no rows for metric {metric!r}")
    rows.sort(key=lambda r: r["condition"])
    return metadata, rows
