"""Sweep harness: B1 gain-ray and B2 observability sweeps.

Builds the paper-scale 2-D configurations, walks a parameter grid, scores
every closed loop (spectral radius, conditioning, integrated sensitivity,
innovation amplification, composite index), simulates seeded runs for NIS
statistics, and correlates the index against miscalibration across the
grid.  Unstable grid points are flagged and excluded from correlations,
never fabricated.
"""

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import hrisk, io, lti, simulate, stats
from .exceptions import (
    DegenerateDataError,
    InstabilityError,
    ValidationError,
)

__all__ = [
    "HarnessConfig",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "b1_system",
    "b2_system",
    "find_alpha_crit",
    "build_spec",
    "run_sweep",
    "run_ablation",
    "summaries_from_rows",
    "results_metadata",
]

B2_EPS_GRID = (1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05, 0.03,
               0.02, 0.01)

METRIC_PAIRS = (("nis_mean", "nis_mean"), ("nis_q", "nis_q"))

SINGLE_ABLATIONS = (frozenset(), frozenset({"margin"}), frozenset({"kappa"}),
                    frozenset({"int_sens"}), frozenset({"ia"}))


@dataclass(frozen=True)
class HarnessConfig:
    """Resolved sweep configuration; every field is a config-file key."""

    kind: str
    sigma_w: float = 0.03
    sigma_v: float = 0.01
    q_filt_scale: float = 0.12
    r_filt_scale: float = 0.30
    a12: float = 0.60
    gain_policy: str = "fixed_ref"
    eps_grid: tuple = B2_EPS_GRID
    alpha_points: int = 12
    alpha_max_frac: float = 0.98
    T: int = 10000
    burn_in: int = simulate.DEFAULT_BURN_IN
    seeds: tuple = (0, 1, 2, 3, 4)
    quantile: float = 0.99
    gate_p: float = 0.99
    n_boot: int = 1000
    boot_seed: int = 12345
    level: float = 0.95

    def as_mapping(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(io.format_value(v) for v in value)
            out[f.name] = value
        return out


_B1_DEFAULTS = {"a12": 0.20, "gain_policy": "gain_ray"}

_INT_KEYS = {"alpha_points", "T", "burn_in", "n_boot", "boot_seed"}
_FLOAT_KEYS = {"sigma_w", "sigma_v", "q_filt_scale", "r_filt_scale", "a12",
               "alpha_max_frac", "quantile", "gate_p", "level"}
_LIST_KEYS = {"eps_grid", "seeds"}


def resolve_config(kind, overrides=None):
    """Merge string overrides (e.g. from a config file) over the defaults."""
    if kind == "B1_alpha_ray":
        cfg = HarnessConfig(kind=kind, **_B1_DEFAULTS)
    elif kind == "B2_epsilon":
        cfg = HarnessConfig(kind=kind)
    else:
        raise ValidationError(f"unknown sweep kind {kind!r}")
    updates = {}
    for key, raw in (overrides or {}).items():
        if key == "kind":
            continue
        if key in _INT_KEYS:
            updates[key] = int(raw)
        elif key in _FLOAT_KEYS:
            updates[key] = float(raw)
        elif key == "seeds":
            updates[key] = tuple(int(s) for s in str(raw).split(",") if s)
        elif key == "eps_grid":
            updates[key] = tuple(float(s) for s in str(raw).split(",") if s)
        elif key == "gain_policy":
            updates[key] = str(raw)
        else:
            raise ValidationError(f"unknown config key {key!r}")
    cfg = replace(cfg, **updates)
    if not cfg.seeds:
        raise ValidationError("seeds must be non-empty")
    return cfg


def b1_system(sigma_w, sigma_v):
    """Stability-margin baseline: triangular A, position-only sensing."""
    return lti.LtiSystem(
        A=[[0.92, 0.20], [0.0, 0.95]],
        H=[[1.0, 0.0]],
        Q=(sigma_w**2) * np.eye(2),
        R=[[sigma_v**2]],
    )


def b2_system(eps, sigma_w, sigma_v, a12=0.60):
    """Observability baseline: coupling eps in H = [1, eps]."""
    return lti.LtiSystem(
        A=[[0.95, a12], [0.0, 0.97]],
        H=[[1.0, eps]],
        Q=(sigma_w**2) * np.eye(2),
        R=[[sigma_v**2]],
    )


def find_alpha_crit(sys, K0, hi_cap=2.0**40, tol=1e-10):
    """First alpha >= 1 where rho(A - alpha K0 H) reaches 1, by bisection."""

    def rho(alpha):
        phi = lti.closed_loop(sys.A, sys.H, alpha * K0)
        return max(abs(np.linalg.eigvals(phi)))

    if rho(1.0) >= 1.0:
        raise InstabilityError("gain ray is already unstable at alpha = 1")
    lo, hi = 1.0, 2.0
    while rho(hi) < 1.0:
        lo, hi = hi, hi * 2.0
        if hi > hi_cap:
            raise ValidationError("no instability found along the gain ray")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) >= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: grid, plant template, filter beliefs, seeds, horizons."""

    kind: str
    grid: tuple
    sys_template: lti.LtiSystem
    filt: lti.FilterSpec
    seeds: tuple
    T: int
    q: float = 0.99
    gate_p: float = 0.99
    burn_in: int = simulate.DEFAULT_BURN_IN
    n_boot: int = 1000
    boot_seed: int = 12345
    level: float = 0.95
    ablations: tuple = (frozenset(),)
    config: Optional[HarnessConfig] = None

    def __post_init__(self):
        if not self.grid:
            raise ValidationError("grid must be non-empty")
        if not self.seeds:
            raise ValidationError("seeds must be non-empty")

    def system_at(self, param):
        if self.kind == "B2_epsilon":
            t = self.sys_template
            return lti.LtiSystem(
                A=t.A, H=[[1.0, float(param)]], Q=t.Q, R=t.R
            )
        return self.sys_template


def build_spec(cfg, ablations=(frozenset(),)):
    """Construct the SweepSpec for a resolved HarnessConfig.

    B1 rides the gain ray alpha * K0 with K0 the true-noise DARE gain and
    a log-spaced grid from 1 up to ``alpha_max_frac`` of the bisection-
    located instability point.  B2 sweeps the observation coupling with
    either a frozen reference gain (DARE at the largest grid coupling
    under the true noises) or per-point re-tuning from the beliefs.
    """
    q_scale, r_scale = cfg.q_filt_scale, cfg.r_filt_scale
    if cfg.kind == "B1_alpha_ray":
        sys = b1_system(cfg.sigma_w, cfg.sigma_v)
        if cfg.gain_policy != "gain_ray":
            raise ValidationError("B1 sweeps use the gain_ray policy")
        K0, _ = lti.dare_gain(sys)
        alpha_crit = find_alpha_crit(sys, K0)
        grid = tuple(
            np.geomspace(1.0, cfg.alpha_max_frac * alpha_crit,
                         cfg.alpha_points)
        )
        policy = lti.GainRay(K0=K0, alpha=1.0)
    elif cfg.kind == "B2_epsilon":
        grid = tuple(cfg.eps_grid)
        sys = b2_system(max(grid), cfg.sigma_w, cfg.sigma_v, cfg.a12)
        if cfg.gain_policy == "fixed_ref":
            K_ref, _ = lti.dare_gain(sys)
            policy = lti.FixedGain(K=K_ref)
        elif cfg.gain_policy == "dare_per_config":
            policy = lti.DarePerConfig()
        else:
            raise ValidationError(
                f"B2 gain_policy must be fixed_ref or dare_per_config, "
                f"got {cfg.gain_policy!r}"
            )
    else:
        raise ValidationError(f"unknown sweep kind {cfg.kind!r}")
    filt = lti.FilterSpec(
        Q=q_scale * sys.Q, R=r_scale * sys.R, gain_policy=policy
    )
    return SweepSpec(
        kind=cfg.kind, grid=grid, sys_template=sys, filt=filt,
        seeds=tuple(cfg.seeds), T=cfg.T, q=cfg.quantile, gate_p=cfg.gate_p,
        burn_in=cfg.burn_in, n_boot=cfg.n_boot, boot_seed=cfg.boot_seed,
        level=cfg.level, ablations=tuple(ablations), config=cfg,
    )


@dataclass(frozen=True)
class SweepRow:
    """One (grid point, seed) record; unstable points carry NaN metrics."""

    param_kind: str
    param_value: float
    seed: int
    rho: float
    kappa: float
    int_sens: float
    ia: float
    hrisk: float
    nis_mean: float
    nis_q: float
    gated_fraction: float
    stable_flag: bool

    def as_dict(self):
        return {name: getattr(self, name) for name in io.RESULTS_COLUMNS}


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    summaries: tuple
    base_config: hrisk.HRiskConfig
    point_factors: dict = field(repr=False, default_factory=dict)
    n_unstable: int = 0
    spec: Optional[SweepSpec] = None


def _gain_at(spec, sys_p, param):
    policy = spec.filt.gain_policy
    if isinstance(policy, lti.GainRay):
        return float(param) * np.asarray(policy.K0, dtype=float)
    if isinstance(policy, lti.FixedGain):
        return np.asarray(policy.K, dtype=float)
    K, _ = lti.dare_gain(sys_p.A, sys_p.H, spec.filt.Q, spec.filt.R)
    return K


def calibration_base(cfg):
    """Closed-loop analysis of the shared base point (B1, alpha = 1)."""
    sys = b1_system(cfg.sigma_w, cfg.sigma_v)
    K0, _ = lti.dare_gain(sys)
    try:
        return lti.analyze_closed_loop(sys.A, sys.H, K0, sys.Q, sys.R)
    except InstabilityError as exc:
        raise ValidationError(
            f"base point (B1, alpha=1) is unstable; cannot calibrate: {exc}"
        )


def run_sweep(spec):
    """Walk the grid, simulate every seed, and summarize correlations.

    Index constants are calibrated once at the shared (B1, alpha = 1) base
    point; structural metrics use the true noises while each run's z^2 is
    normalized by the filter's believed innovation covariance.
    """
    cfg = spec.config or resolve_config(spec.kind)
    base_analysis = calibration_base(cfg)
    h_config = hrisk.calibrate_constants(
        base_analysis, base_point="B1 alpha=1"
    )

    rows = []
    point_factors = {}
    n_unstable = 0
    for param in spec.grid:
        sys_p = spec.system_at(param)
        K_p = _gain_at(spec, sys_p, param)
        try:
            analysis = lti.analyze_closed_loop(
                sys_p.A, sys_p.H, K_p, sys_p.Q, sys_p.R
            )
        except InstabilityError as exc:
            n_unstable += 1
            nan = float("nan")
            for seed in spec.seeds:
                rows.append(SweepRow(
                    param_kind=spec.kind, param_value=float(param),
                    seed=seed, rho=float(exc.rho), kappa=nan, int_sens=nan,
                    ia=nan, hrisk=nan, nis_mean=nan, nis_q=nan,
                    gated_fraction=nan, stable_flag=False,
                ))
            continue
        factors = hrisk.hrisk_factors(analysis)
        point_factors[float(param)] = factors
        index = hrisk.hrisk_index(factors, h_config)
        filt_p = lti.FilterSpec(
            Q=spec.filt.Q, R=spec.filt.R, gain_policy=lti.FixedGain(K=K_p)
        )
        for seed in spec.seeds:
            run = simulate.RunConfig(
                seed=seed, T=spec.T, sys=sys_p, filt=filt_p, q=spec.q,
                gate_p=spec.gate_p, burn_in=spec.burn_in,
            )
            _, series = simulate.simulate_run(run)
            rows.append(SweepRow(
                param_kind=spec.kind, param_value=float(param), seed=seed,
                rho=analysis.rho, kappa=analysis.kappa,
                int_sens=analysis.int_sens, ia=analysis.ia, hrisk=index,
                nis_mean=series.nis_mean, nis_q=series.nis_q,
                gated_fraction=series.gated_fraction, stable_flag=True,
            ))

    summaries = summaries_from_rows(
        rows, n_boot=spec.n_boot, boot_seed=spec.boot_seed, level=spec.level
    )
    return SweepResult(
        rows=tuple(rows), summaries=tuple(summaries), base_config=h_config,
        point_factors=point_factors, n_unstable=n_unstable, spec=spec,
    )


def _interval_row(pair_label, statistic, data, n_boot, boot_seed, level):
    try:
        est = stats.bca_ci(
            data, statistic, level=level, n_boot=n_boot, seed=boot_seed
        )
    except (ValidationError, DegenerateDataError) as exc:
        return {
            "pair_label": pair_label, "statistic": statistic, "point": None,
            "ci_lo": None, "ci_hi": None, "method": f"degenerate:{exc}",
            "n": data.n, "n_boot": None, "seed": None,
        }
    method = est.method if est.flag is None else f"{est.method}:{est.flag}"
    return {
        "pair_label": pair_label, "statistic": statistic, "point": est.point,
        "ci_lo": est.lo, "ci_hi": est.hi, "method": method, "n": data.n,
        "n_boot": est.n_boot, "seed": est.seed,
    }


def _point_row(pair_label, statistic, value, n):
    return {
        "pair_label": pair_label, "statistic": statistic, "point": value,
        "ci_lo": None, "ci_hi": None, "method": "point", "n": n,
        "n_boot": None, "seed": None,
    }


def _pair_block(pair_label, x, y, n_boot, boot_seed, level):
    """Summary rows for one (x, y) pairing."""
    out = []
    n = len(x)
    if n < 3:
        for statistic in ("pearson", "spearman", "theil_sen"):
            out.append({
                "pair_label": pair_label, "statistic": statistic,
                "point": None, "ci_lo": None, "ci_hi": None,
                "method": "degenerate:n<3", "n": n, "n_boot": None,
                "seed": None,
            })
        return out
    sample = stats.PairedSample(np.asarray(x), np.asarray(y))
    for statistic in ("pearson", "spearman", "theil_sen"):
        out.append(_interval_row(
            pair_label, statistic, sample, n_boot, boot_seed, level
        ))
    try:
        ts = stats.theil_sen(sample)
        out.append(_point_row(
            pair_label, "theil_sen_intercept",
            stats.theil_sen_intercept(sample, ts), n,
        ))
        slope, intercept = stats.ols_fit(sample)
        out.append(_point_row(pair_label, "ols_slope", slope, n))
        out.append(_point_row(pair_label, "ols_intercept", intercept, n))
    except DegenerateDataError:
        pass
    return out


def summaries_from_rows(rows, n_boot=1000, boot_seed=12345, level=0.95,
                        index_label="hrisk", index_of=None):
    """Correlate the index against NIS statistics across stable grid points.

    Aggregates seed means per grid point for the headline rows (labels
    ``<index>_vs_<metric>`` and ``log10_<index>_vs_<metric>``), then adds
    per-seed point rows (suffix ``@seed<N>``).  ``index_of`` optionally
    recomputes the index per row (used by ablations); it defaults to the
    recorded hrisk column.
    """
    stable = [r for r in rows if _stable(r)]
    if index_of is None:
        index_of = lambda row: _get(row, "hrisk")
    by_param = {}
    for row in stable:
        by_param.setdefault(_get(row, "param_value"), []).append(row)
    params = sorted(by_param)
    out = []
    for metric, metric_name in METRIC_PAIRS:
        x, y = [], []
        for p in params:
            group = by_param[p]
            x.append(index_of(group[0]))
            y.append(float(np.mean([_get(r, metric) for r in group])))
        for label, xs in ((index_label, x),
                          (f"log10_{index_label}", _log10(x))):
            out.extend(_pair_block(
                f"{label}_vs_{metric_name}", xs, y, n_boot, boot_seed, level
            ))
        seeds = sorted({_get(r, "seed") for r in stable})
        if len(seeds) > 1:
            for seed in seeds:
                xs, ys = [], []
                for p in params:
                    group = [r for r in by_param[p] if _get(r, "seed") == seed]
                    if group:
                        xs.append(index_of(group[0]))
                        ys.append(_get(group[0], metric))
                if len(xs) < 2:
                    continue
                try:
                    sample = stats.PairedSample(np.asarray(xs), np.asarray(ys))
                    label = f"{index_label}_vs_{metric_name}@seed{seed}"
                    for statistic, fn in (
                        ("pearson", stats.pearson),
                        ("spearman", stats.spearman),
                        ("theil_sen", stats.theil_sen),
                    ):
                        out.append(_point_row(
                            label, statistic, fn(sample), len(xs)
                        ))
                except DegenerateDataError:
                    continue
    return out


def _stable(row):
    return row.stable_flag if isinstance(row, SweepRow) else row["stable_flag"]


def _get(row, name):
    return getattr(row, name) if isinstance(row, SweepRow) else row[name]


def _log10(values):
    return [math.log10(v) for v in values]


def run_ablation(spec):
    """Run the sweep once, then re-summarize under each factor ablation.

    Returns ``(SweepResult, {label: summary rows})`` where the empty
    ablation reproduces the plain sweep summary under the label 'hrisk'.
    """
    result = run_sweep(spec)
    by_label = {}
    for ablate in spec.ablations:
        ablate = frozenset(ablate)
        if ablate:
            label = "hrisk_no_" + "_".join(sorted(ablate))
        else:
            label = "hrisk"

        def index_of(row, _ablate=ablate):
            factors = result.point_factors[_get(row, "param_value")]
            return hrisk.hrisk_index(factors, result.base_config, _ablate)

        by_label[label] = summaries_from_rows(
            result.rows, n_boot=spec.n_boot, boot_seed=spec.boot_seed,
            level=spec.level, index_label=label, index_of=index_of,
        )
    return result, by_label


def results_metadata(spec, result):
    """Deterministic metadata block for the results/summary CSV pair."""
    cfg = spec.config or resolve_config(spec.kind)
    meta = {f"config.{k}": v for k, v in cfg.as_mapping().items()}
    meta.update({
        "package": "epistab-0.1.0",
        "prng": simulate.PRNG_NAME,
        "gaussian_transform": simulate.GAUSSIAN_TRANSFORM,
        "quantile_convention": "type7-linear-interpolation",
        "burn_in": spec.burn_in,
        "base_point": result.base_config.base_point,
        "n_unstable_excluded": result.n_unstable,
        "grid": ",".join(io.format_value(float(p)) for p in spec.grid),
        "believed_s": "dare-under-beliefs",
    })
    for name in hrisk.FACTOR_NAMES:
        meta[f"c_{name}"] = io.format_value(
            result.base_config.constant(name)
        )
    return meta
