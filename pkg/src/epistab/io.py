"""CSV emission/loading and flat key=value config files.

All CSVs are UTF-8, comma-separated, with '#'-prefixed metadata lines
before the header.  Floats are serialized with 17 significant digits so
round-trips are exact; NaN/None serialize as empty fields.  Nothing
time-dependent is ever written, so identical inputs yield byte-identical
files.
"""

import csv
import io as _io
import math
from pathlib import Path

from .exceptions import CsvFormatError, ValidationError

__all__ = [
    "RESULTS_COLUMNS",
    "SUMMARY_COLUMNS",
    "DELTAS_INPUT_COLUMNS",
    "DELTAS_SUMMARY_COLUMNS",
    "DELTAS_LONG_COLUMNS",
    "PREDICTION_COLUMNS",
    "format_value",
    "write_csv",
    "read_csv",
    "load_results_csv",
    "parse_config_text",
    "parse_config",
]

RESULTS_COLUMNS = [
    "param_kind", "param_value", "seed", "rho", "kappa", "int_sens", "ia",
    "hrisk", "nis_mean", "nis_q", "gated_fraction", "stable_flag",
]
SUMMARY_COLUMNS = [
    "pair_label", "statistic", "point", "ci_lo", "ci_hi", "method", "n",
    "n_boot", "seed",
]
DELTAS_INPUT_COLUMNS = [
    "domain", "qid", "condition", "prompt", "confidence", "correct",
    "brier", "logloss", "halluc_rate",
]
DELTAS_SUMMARY_COLUMNS = [
    "condition", "metric", "n_pairs", "mean_delta", "ci_lo", "ci_hi",
    "method", "n_boot", "seed",
]
DELTAS_LONG_COLUMNS = [
    "condition", "metric", "domain", "qid", "baseline_value",
    "condition_value", "delta",
]
PREDICTION_COLUMNS = ["confidence", "correct"]

_RESULTS_FLOATS = [
    "param_value", "rho", "kappa", "int_sens", "ia", "hrisk",
    "nis_mean", "nis_q", "gated_fraction",
]


def format_value(value):
    """Serialize one cell; floats get 17 significant digits, NaN/None ''."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_csv(path, fieldnames, rows, metadata=None):
    """Write rows (dicts) under '#' metadata lines; returns the text written."""
    buf = _io.StringIO()
    for key in sorted(metadata or {}):
        buf.write(f"# {key}={metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        unknown = set(row) - set(fieldnames)
        if unknown:
            raise ValidationError(f"row has unknown fields: {sorted(unknown)}")
        writer.writerow([format_value(row.get(name)) for name in fieldnames])
    text = buf.getvalue()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    return text


def read_csv(path, required=None):
    """Read a metadata-prefixed CSV.

    Returns ``(metadata, fieldnames, rows)`` with every cell left as a
    string.  Raises :class:`CsvFormatError` with a line number for a
    missing header, missing required columns, or ragged rows.
    """
    metadata = {}
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            payload = line[1:].strip()
            if "=" in payload:
                key, _, value = payload.partition("=")
                metadata[key.strip()] = value
            body_start = i + 1
        else:
            break
    body = lines[body_start:]
    if not body or not body[0].strip():
        raise CsvFormatError("missing header row", line=body_start + 1)
    reader = csv.reader(body)
    fieldnames = next(reader)
    if required:
        missing = [c for c in required if c not in fieldnames]
        if missing:
            raise CsvFormatError(
                f"missing required columns: {missing}", line=body_start + 1
            )
    rows = []
    for offset, values in enumerate(reader):
        if not values:
            continue
        if len(values) != len(fieldnames):
            raise CsvFormatError(
                f"expected {len(fieldnames)} fields, got {len(values)}",
                line=body_start + 2 + offset,
            )
        rows.append(dict(zip(fieldnames, values)))
    return metadata, fieldnames, rows


def _parse_float(cell, column, line):
    if cell == "":
        return float("nan")
    try:
        return float(cell)
    except ValueError:
        raise CsvFormatError(f"bad float {cell!r} in column {column}", line=line)


def load_results_csv(path):
    """Load a sweep results CSV into typed rows.

    Returns ``(rows, metadata)`` where each row is a dict with floats for
    the metric columns (NaN for empty cells), int seed, and bool
    stable_flag.
    """
    metadata, fieldnames, raw = read_csv(path, required=RESULTS_COLUMNS)
    rows = []
    header_lines = len(metadata) if metadata else 0
    for i, r in enumerate(raw):
        line = header_lines + 2 + i
        row = {"param_kind": r["param_kind"]}
        for col in _RESULTS_FLOATS:
            row[col] = _parse_float(r[col], col, line)
        try:
            row["seed"] = int(r["seed"])
        except ValueError:
            raise CsvFormatError(f"bad seed {r['seed']!r}", line=line)
        row["stable_flag"] = r["stable_flag"] == "1"
        rows.append(row)
    return rows, metadata


def parse_config_text(text):
    """Parse flat ``key=value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"config line {lineno}: expected key=value, got {raw!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def parse_config(path):
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
