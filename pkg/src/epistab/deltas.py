"""Paired condition-delta analysis of pre-computed result CSVs.

Pairs items across prompt conditions on (domain, qid) — prompt text is
ignored — and reports per-item metric differences against a baseline
condition with BCa confidence intervals, plus a pooled summary of the
whole input (mean confidence, correctness, overconfident rate).  The
analyzer never calls a model; it consumes an existing results CSV.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io, stats
from .exceptions import ValidationError

__all__ = [
    "DELTA_METRICS",
    "PairedItem",
    "load_condition_records",
    "analyze_condition_deltas",
    "write_delta_reports",
]

DELTA_METRICS = ("brier", "logloss", "halluc_rate", "confidence", "correct")

# a wrong answer delivered with confidence above this is overconfident
OVERCONFIDENT_THRESHOLD = 0.5


@dataclass(frozen=True)
class PairedItem:
    """One (domain, qid, condition) record with its metric values."""

    domain: str
    qid: str
    condition: str
    confidence: float
    correct: float
    brier: float
    logloss: float
    halluc_rate: float

    def metric(self, name):
        return getattr(self, name)


def load_condition_records(path):
    """Load and validate the deltas input CSV."""
    _, _, raw = io.read_csv(path, required=io.DELTAS_INPUT_COLUMNS)
    records = []
    seen = set()
    for r in raw:
        key = (r["domain"], r["qid"], r["condition"])
        if key in seen:
            raise ValidationError(
                f"duplicate (domain, qid, condition) = {key}"
            )
        seen.add(key)
        try:
            records.append(PairedItem(
                domain=r["domain"], qid=r["qid"], condition=r["condition"],
                confidence=float(r["confidence"]),
                correct=float(r["correct"]),
                brier=float(r["brier"]),
                logloss=float(r["logloss"]),
                halluc_rate=float(r["halluc_rate"]),
            ))
        except ValueError as exc:
            raise ValidationError(f"bad numeric field in {key}: {exc}")
        if not (0.0 <= records[-1].confidence <= 1.0):
            raise ValidationError(f"confidence outside [0, 1] in {key}")
    if not records:
        raise ValidationError("input has no records")
    return records


def pooled_summary(records):
    """Whole-input aggregates: confidence, correctness, overconfident rate."""
    conf = np.array([r.confidence for r in records])
    correct = np.array([r.correct for r in records])
    overconfident = (correct == 0) & (conf > OVERCONFIDENT_THRESHOLD)
    return {
        "pooled_n": len(records),
        "pooled_mean_confidence": float(conf.mean()),
        "pooled_correctness": float(correct.mean()),
        "pooled_overconfident_rate": float(overconfident.mean()),
    }


def analyze_condition_deltas(records, baseline="C0", metrics=DELTA_METRICS,
                             n_boot=1000, boot_seed=12345, level=0.95):
    """Per-item deltas (condition - baseline) with BCa CIs per metric.

    Returns ``(summary_rows, long_rows, pooled, warnings)``.  Unpaired
    items are excluded with a warning carrying the count; a missing
    baseline condition or fewer than three pairs is fatal.
    """
    if isinstance(records, (str, bytes)) or hasattr(records, "__fspath__"):
        records = load_condition_records(records)
    conditions = sorted({r.condition for r in records})
    if baseline not in conditions:
        raise ValidationError(
            f"baseline condition {baseline!r} not in input "
            f"(found {conditions})"
        )
    base_by_key = {
        (r.domain, r.qid): r for r in records if r.condition == baseline
    }
    warnings = []
    summary_rows = []
    long_rows = []
    n_unpaired = 0
    for condition in conditions:
        if condition == baseline:
            continue
        cond_records = [r for r in records if r.condition == condition]
        paired = []
        for r in cond_records:
            base = base_by_key.get((r.domain, r.qid))
            if base is None:
                n_unpaired += 1
                continue
            paired.append((base, r))
        paired.sort(key=lambda pair: (pair[0].domain, pair[0].qid))
        if len(paired) < 3:
            raise ValidationError(
                f"condition {condition!r} has {len(paired)} paired items; "
                "need at least 3"
            )
        for metric in metrics:
            deltas = np.array([
                r.metric(metric) - base.metric(metric) for base, r in paired
            ])
            est = stats.bca_ci(
                deltas, "mean", level=level, n_boot=n_boot, seed=boot_seed
            )
            method = est.method if est.flag is None else (
                f"{est.method}:{est.flag}"
            )
            summary_rows.append({
                "condition": condition, "metric": metric,
                "n_pairs": len(paired), "mean_delta": est.point,
                "ci_lo": est.lo, "ci_hi": est.hi, "method": method,
                "n_boot": est.n_boot, "seed": est.seed,
            })
            for (base, r), delta in zip(paired, deltas):
                long_rows.append({
                    "condition": condition, "metric": metric,
                    "domain": base.domain, "qid": base.qid,
                    "baseline_value": base.metric(metric),
                    "condition_value": r.metric(metric),
                    "delta": float(delta),
                })
    if n_unpaired:
        warnings.append(
            f"excluded {n_unpaired} unpaired item(s) with no "
            f"{baseline} counterpart"
        )
    return summary_rows, long_rows, pooled_summary(records), warnings


def write_delta_reports(out_dir, summary_rows, long_rows, pooled,
                        baseline="C0", extra_metadata=None):
    """Emit condition_deltas_summary.csv and condition_deltas_long.csv."""
    meta = {
        "package": "epistab-0.1.0",
        "baseline": baseline,
        "pairing": "domain+qid (prompt ignored)",
        "overconfident_definition":
            f"correct==0 and confidence>{OVERCONFIDENT_THRESHOLD}",
    }
    meta.update({k: io.format_value(v) for k, v in pooled.items()})
    meta.update(extra_metadata or {})
    out = Path(out_dir)
    summary_path = out / "condition_deltas_summary.csv"
    long_path = out / "condition_deltas_long.csv"
    io.write_csv(summary_path, io.DELTAS_SUMMARY_COLUMNS, summary_rows, meta)
    io.write_csv(long_path, io.DELTAS_LONG_COLUMNS, long_rows, meta)
    return summary_path, long_path
