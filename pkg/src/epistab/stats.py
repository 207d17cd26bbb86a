"""Correlation, robust slope, bootstrap and multiple-comparison machinery.

Implements Pearson and mid-rank Spearman correlations, the Theil-Sen
slope, bias-corrected and accelerated (BCa) bootstrap intervals, the
Benjamini-Hochberg step-up procedure, and Cliff's delta / Hedges' g
effect sizes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.stats

from .exceptions import DegenerateDataError, ValidationError

__all__ = [
    "PairedSample",
    "IntervalEstimate",
    "pearson",
    "spearman",
    "theil_sen",
    "theil_sen_intercept",
    "ols_fit",
    "bca_ci",
    "bh_fdr",
    "cliffs_delta",
    "hedges_g",
]

DEFAULT_N_BOOT = 1000


@dataclass(frozen=True)
class PairedSample:
    """Two equal-length finite sequences observed pairwise."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1:
            raise ValidationError("x and y must be 1-D")
        if x.size != y.size:
            raise ValidationError("x and y must have equal length")
        if x.size < 2:
            raise ValidationError("need at least two pairs")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.size


@dataclass(frozen=True)
class IntervalEstimate:
    """Point estimate with a confidence interval and its provenance."""

    point: float
    lo: float
    hi: float
    level: float
    method: str
    n_boot: int
    seed: Optional[int] = None
    flag: Optional[str] = None


def _as_sample(s):
    return s if isinstance(s, PairedSample) else PairedSample(*s)


def pearson(s):
    """Sample Pearson correlation of a paired sample."""
    s = _as_sample(s)
    xc = s.x - s.x.mean()
    yc = s.y - s.y.mean()
    denom = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    if denom == 0.0:
        raise DegenerateDataError("zero variance in x or y")
    return float(np.clip((xc * yc).sum() / denom, -1.0, 1.0))


def spearman(s):
    """Pearson correlation of mid-ranks (average ranks on ties)."""
    s = _as_sample(s)
    if np.all(s.x == s.x[0]) or np.all(s.y == s.y[0]):
        raise DegenerateDataError("all-equal x or y has no rank ordering")
    rx = scipy.stats.rankdata(s.x, method="average")
    ry = scipy.stats.rankdata(s.y, method="average")
    return pearson(PairedSample(rx, ry))


def _pairwise_slopes(x, y):
    n = x.size
    ii, jj = np.triu_indices(n, k=1)
    dx = x[jj] - x[ii]
    dy = y[jj] - y[ii]
    keep = dx != 0.0
    return dy[keep] / dx[keep]


def theil_sen(s):
    """Median of all pairwise slopes; pairs with equal x are skipped."""
    s = _as_sample(s)
    slopes = _pairwise_slopes(s.x, s.y)
    if slopes.size == 0:
        raise DegenerateDataError("all x equal; no pairwise slope defined")
    return float(np.median(slopes))


def theil_sen_intercept(s, slope=None):
    """Median residual intercept for the Theil-Sen line."""
    s = _as_sample(s)
    if slope is None:
        slope = theil_sen(s)
    return float(np.median(s.y - slope * s.x))


def ols_fit(s):
    """Least-squares (slope, intercept) of y on x."""
    s = _as_sample(s)
    xc = s.x - s.x.mean()
    sxx = float((xc * xc).sum())
    if sxx == 0.0:
        raise DegenerateDataError("zero variance in x")
    slope = float((xc * (s.y - s.y.mean())).sum() / sxx)
    return slope, float(s.y.mean() - slope * s.x.mean())


_STATISTICS = {
    "mean": lambda data: float(np.mean(data)),
    "median": lambda data: float(np.median(data)),
    "pearson": pearson,
    "spearman": spearman,
    "theil_sen": theil_sen,
}


def _resolve_statistic(statistic):
    if callable(statistic):
        return statistic, getattr(statistic, "__name__", "custom")
    try:
        return _STATISTICS[statistic], statistic
    except KeyError:
        raise ValidationError(
            f"unknown statistic {statistic!r}; known: {sorted(_STATISTICS)}"
        )


def _take(data, idx):
    if isinstance(data, PairedSample):
        return PairedSample(data.x[idx], data.y[idx])
    return data[idx]


def bca_ci(data, statistic, level=0.95, n_boot=DEFAULT_N_BOOT, seed=0):
    """Bias-corrected and accelerated bootstrap interval.

    ``data`` is a 1-D sequence or a :class:`PairedSample`; paired data is
    resampled by item pair.  ``statistic`` is a registry label ("mean",
    "median", "pearson", "spearman", "theil_sen") or a callable.  All
    replicate indices are drawn up front from a Philox generator keyed by
    ``seed``; replicate b consumes row b of that matrix, so a parallel map
    over replicates reproduces the serial result bit for bit.

    Degenerate cases (all replicates equal, or a bias fraction of 0/1)
    return a flagged interval instead of raising.
    """
    if n_boot < 100:
        raise ValidationError("n_boot must be >= 100")
    if not (0.0 < level < 1.0):
        raise ValidationError("level must lie in (0, 1)")
    if not isinstance(data, PairedSample):
        data = np.asarray(data, dtype=float)
        if data.ndim != 1:
            raise ValidationError("data must be 1-D or a PairedSample")
    n = data.n if isinstance(data, PairedSample) else data.size
    if n < 3:
        raise ValidationError("need at least three observations")
    stat_fn, label = _resolve_statistic(statistic)

    point = float(stat_fn(data))
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
    idx = rng.integers(0, n, size=(n_boot, n))
    if label == "mean" and not isinstance(data, PairedSample):
        reps = data[idx].mean(axis=1)
    else:
        reps = np.empty(n_boot)
        for b in range(n_boot):
            try:
                reps[b] = stat_fn(_take(data, idx[b]))
            except DegenerateDataError:
                reps[b] = np.nan
    reps = reps[np.isfinite(reps)]
    if reps.size == 0:
        raise DegenerateDataError("statistic undefined on every resample")

    def interval(lo, hi, flag=None):
        out_lo, out_hi = float(lo), float(hi)
        if flag is None and not (out_lo <= point <= out_hi):
            flag = "point_outside_interval"
        return IntervalEstimate(
            point=point, lo=out_lo, hi=out_hi, level=level,
            method="BCa", n_boot=n_boot, seed=seed, flag=flag,
        )

    if np.all(reps == reps[0]):
        return interval(reps[0], reps[0], flag="degenerate")

    frac_below = float(np.mean(reps < point))
    if frac_below <= 0.0 or frac_below >= 1.0:
        # bias correction undefined; fall back to percentile bounds
        alpha = 0.5 * (1.0 - level)
        return interval(
            np.quantile(reps, alpha),
            np.quantile(reps, 1.0 - alpha),
            flag="bias_fraction_extreme",
        )
    z0 = scipy.stats.norm.ppf(frac_below)

    # jackknife acceleration
    jack = np.empty(n)
    mask = np.ones(n, dtype=bool)
    for i in range(n):
        mask[i] = False
        try:
            jack[i] = stat_fn(_take(data, np.nonzero(mask)[0]))
        except DegenerateDataError:
            jack[i] = np.nan
        mask[i] = True
    jack = jack[np.isfinite(jack)]
    dev = jack.mean() - jack
    denom = 6.0 * (dev * dev).sum() ** 1.5
    a = float((dev**3).sum() / denom) if denom > 0.0 else 0.0

    alpha = 0.5 * (1.0 - level)
    z_lo = scipy.stats.norm.ppf(alpha)
    z_hi = scipy.stats.norm.ppf(1.0 - alpha)
    p_lo = scipy.stats.norm.cdf(z0 + (z0 + z_lo) / (1.0 - a * (z0 + z_lo)))
    p_hi = scipy.stats.norm.cdf(z0 + (z0 + z_hi) / (1.0 - a * (z0 + z_hi)))
    return interval(np.quantile(reps, p_lo), np.quantile(reps, p_hi))


def bh_fdr(p_values, q):
    """Benjamini-Hochberg step-up: reject flags and adjusted p-values.

    Rejections are a prefix of the ascending p-value order; adjusted
    p-values are monotone along that order and capped at 1.
    """
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("p_values must be a non-empty 1-D sequence")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValidationError("p-values must lie in [0, 1]")
    if not (0.0 < q < 1.0):
        raise ValidationError("q must lie in (0, 1)")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    thresholds = q * np.arange(1, m + 1) / m
    passing = np.nonzero(ranked <= thresholds)[0]
    k = passing[-1] + 1 if passing.size else 0
    reject = np.zeros(m, dtype=bool)
    reject[order[:k]] = True
    adj_sorted = np.minimum.accumulate((ranked * m / np.arange(1, m + 1))[::-1])[::-1]
    adj_sorted = np.minimum(adj_sorted, 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adj_sorted
    return reject, adjusted


def cliffs_delta(a, b):
    """(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("both samples must be non-empty")
    diff = a[:, None] - b[None, :]
    return float((np.sign(diff)).sum() / (a.size * b.size))


def hedges_g(a, b):
    """Pooled-SD Cohen's d with the small-sample correction J."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValidationError("both samples need at least two values")
    na, nb = a.size, b.size
    pooled_var = (
        (na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)
    ) / (na + nb - 2)
    if pooled_var <= 0.0:
        raise DegenerateDataError("zero pooled variance")
    d = (a.mean() - b.mean()) / np.sqrt(pooled_var)
    j = 1.0 - 3.0 / (4.0 * (na + nb) - 9.0)
    return float(d * j)
