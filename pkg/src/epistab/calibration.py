"""Calibration metrics for probabilistic classifiers.

Expected/maximum calibration error over confidence bins (equal-width or
equal-frequency, optionally debiased), the unnormalized multiclass Brier
score on [0, 2], and clipped log loss.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ValidationError

__all__ = [
    "PredictionRecord",
    "BinScheme",
    "binary_record",
    "ece",
    "mce",
    "brier",
    "log_loss",
]

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PredictionRecord:
    """One prediction: a probability vector over K >= 2 classes and the label."""

    probs: tuple
    label: int

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 2:
            raise ValidationError("need at least two classes")
        if any(p < 0.0 or p > 1.0 for p in probs):
            raise ValidationError("probabilities must lie in [0, 1]")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {sum(probs)!r}, not 1")
        if not (0 <= self.label < len(probs)):
            raise ValidationError(
                f"label {self.label} outside [0, {len(probs)})"
            )


def binary_record(p, correct):
    """Binary task as a K=2 record: probs (p, 1-p), class 0 = asserted answer."""
    return PredictionRecord(probs=(p, 1.0 - p), label=0 if correct else 1)


@dataclass(frozen=True)
class BinScheme:
    """Confidence binning: 'equal_width' or 'equal_frequency', B bins."""

    mode: str = "equal_frequency"
    B: int = 10
    debias: bool = False

    def __post_init__(self):
        if self.mode not in ("equal_width", "equal_frequency"):
            raise ValidationError(f"unknown bin mode {self.mode!r}")
        if self.B < 1:
            raise ValidationError("B must be >= 1")


def _conf_correct(records: Sequence[PredictionRecord]):
    if len(records) == 0:
        raise ValidationError("need at least one record")
    conf = np.array([max(r.probs) for r in records])
    pred = np.array([int(np.argmax(r.probs)) for r in records])
    correct = np.array([int(p == r.label) for p, r in zip(pred, records)])
    return conf, correct


def _bins(conf, scheme):
    """Yield index arrays, one per occupied bin."""
    n = conf.size
    if scheme.mode == "equal_width":
        # bins [lo, hi) over [0, 1], last bin closed at 1
        edges = np.linspace(0.0, 1.0, scheme.B + 1)
        idx = np.minimum(
            np.searchsorted(edges, conf, side="right") - 1, scheme.B - 1
        )
        for b in range(scheme.B):
            members = np.nonzero(idx == b)[0]
            if members.size:
                yield members
    else:
        if scheme.B > n:
            raise ValidationError(
                f"equal_frequency needs B <= n, got B={scheme.B}, n={n}"
            )
        order = np.argsort(conf, kind="stable")  # ties keep input order
        for members in np.array_split(order, scheme.B):
            if members.size:
                yield members


def _bin_gaps(records, scheme):
    conf, correct = _conf_correct(records)
    n = conf.size
    for members in _bins(conf, scheme):
        nb = members.size
        acc = float(correct[members].mean())
        avg_conf = float(conf[members].mean())
        gap = abs(acc - avg_conf)
        if scheme.debias:
            # subtract the estimated sampling noise of the per-bin accuracy
            gap = math.sqrt(max(0.0, gap * gap - acc * (1.0 - acc) / nb))
        yield nb / n, gap


def ece(records, scheme=BinScheme()):
    """Expected calibration error: bin-weighted mean |accuracy - confidence|."""
    return float(sum(w * gap for w, gap in _bin_gaps(records, scheme)))


def mce(records, scheme=BinScheme()):
    """Maximum calibration error: worst occupied bin's |accuracy - confidence|."""
    return float(max(gap for _, gap in _bin_gaps(records, scheme)))


def brier(records):
    """Mean squared distance between probability vectors and one-hot labels.

    Unnormalized: 0 for a certain correct prediction, 2 for a certain
    wrong one (any K >= 2).
    """
    if len(records) == 0:
        raise ValidationError("need at least one record")
    total = 0.0
    for r in records:
        total += sum(
            (p - (1.0 if k == r.label else 0.0)) ** 2
            for k, p in enumerate(r.probs)
        )
    return total / len(records)


def log_loss(records, epsilon_clip=1e-15):
    """Mean negative log probability of the true class, clipped below."""
    if len(records) == 0:
        raise ValidationError("need at least one record")
    if not (0.0 < epsilon_clip < 1.0):
        raise ValidationError("epsilon_clip must lie in (0, 1)")
    total = 0.0
    for r in records:
        total -= math.log(min(max(r.probs[r.label], epsilon_clip), 1.0))
    return total / len(records)
