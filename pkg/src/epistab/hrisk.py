"""Composite instability index of the closed loop.

The index is the product of four unit-scaled factors of Phi = A - K H:
inverse stability margin 1/(1 - rho), condition number kappa, integrated
sensitivity ||(I - Phi (x) Phi)^-1||_2, and innovation amplification
tr(H P H.T)/tr(R).  Scaling constants are calibrated so every factor is 1
at a declared base configuration; only ratios and correlations of the
index are meaningful.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import lti
from .exceptions import InstabilityError, SearchError, ValidationError

__all__ = [
    "FACTOR_NAMES",
    "HRiskFactors",
    "HRiskConfig",
    "hrisk_factors",
    "calibrate_constants",
    "hrisk_index",
    "critique_gain_search",
]

FACTOR_NAMES = ("margin", "kappa", "int_sens", "ia")


@dataclass(frozen=True)
class HRiskFactors:
    """The four factors, before unit scaling."""

    margin: float
    kappa: float
    int_sens: float
    ia: float

    def as_dict(self):
        return {name: getattr(self, name) for name in FACTOR_NAMES}


@dataclass(frozen=True)
class HRiskConfig:
    """Unit-scaling constants c_i and a note on where they were calibrated."""

    c_margin: float
    c_kappa: float
    c_int_sens: float
    c_ia: float
    base_point: str = ""

    def constant(self, name):
        return getattr(self, f"c_{name}")


def hrisk_factors(analysis):
    """Extract the four factors from a closed-loop analysis.

    Raises
    ------
    InstabilityError
        If the analysis reports rho >= 1 (margin factor undefined).
    """
    if analysis.rho >= 1.0:
        raise InstabilityError(
            f"factors undefined for rho = {analysis.rho:.6g}",
            rho=analysis.rho,
        )
    return HRiskFactors(
        margin=1.0 / (1.0 - analysis.rho),
        kappa=analysis.kappa,
        int_sens=analysis.int_sens,
        ia=analysis.ia,
    )


def calibrate_constants(base, base_point=""):
    """Constants c_i = 1/factor_i at the base configuration.

    Accepts a ClosedLoopAnalysis or HRiskFactors.  By construction the
    full index evaluates to exactly 1 at the base point.

    Raises
    ------
    ValidationError
        If any base factor is zero or undefined (NaN/inf).
    """
    factors = base if isinstance(base, HRiskFactors) else hrisk_factors(base)
    consts = {}
    for name, value in factors.as_dict().items():
        if not math.isfinite(value) or value <= 0.0:
            raise ValidationError(
                f"cannot calibrate: base factor {name!r} = {value!r}"
            )
        consts[f"c_{name}"] = 1.0 / value
    return HRiskConfig(base_point=base_point, **consts)


def hrisk_index(factors, config, ablate=frozenset()):
    """Product of c_i * factor_i over the non-ablated factors.

    ``ablate`` names factors to drop (subset of FACTOR_NAMES); removing
    all four leaves nothing to multiply and is rejected.
    """
    ablate = frozenset(ablate)
    unknown = ablate - set(FACTOR_NAMES)
    if unknown:
        raise ValidationError(f"unknown factor ids: {sorted(unknown)}")
    if len(ablate) == len(FACTOR_NAMES):
        raise ValidationError("cannot ablate all four factors")
    out = 1.0
    for name, value in factors.as_dict().items():
        if name in ablate:
            continue
        out *= config.constant(name) * value
    return out


def critique_gain_search(sys, filt, lam, alpha_grid):
    """Grid search on the ray K(alpha) = alpha K0 for the critique objective.

    Minimizes ``tr(S(K)) + lam * index(Phi(K))`` where ``tr(S)`` is the
    analytic mean-square innovation of the loop under the true noises and
    the index is unit-scaled at the ray's own alpha = 1 point.  Candidates
    with rho(Phi) >= 1 are skipped; ties break toward the smaller alpha.

    Parameters
    ----------
    sys : LtiSystem
        True plant.
    filt : FilterSpec
        Supplies the base gain: a GainRay policy's K0 is used directly,
        a FixedGain's K serves as K0, and dare_per_config re-derives K0
        from the true (Q, R).
    lam : float
        Nonnegative weight on the instability index.
    alpha_grid : sequence of float
        Candidate scalings; must be non-empty.

    Returns
    -------
    (alpha, K, objective) for the grid argmin.

    Raises
    ------
    SearchError
        If every grid point is unstable.
    """
    if lam < 0:
        raise ValidationError("lam must be nonnegative")
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise ValidationError("alpha_grid must be non-empty")
    policy = filt.gain_policy
    if isinstance(policy, lti.GainRay):
        K0 = np.asarray(policy.K0, dtype=float)
    elif isinstance(policy, lti.FixedGain):
        K0 = np.asarray(policy.K, dtype=float)
    else:
        K0, _ = lti.dare_gain(sys)

    try:
        base = lti.analyze_closed_loop(sys.A, sys.H, K0, sys.Q, sys.R)
        config = calibrate_constants(base, base_point="ray alpha=1")
    except (InstabilityError, ValidationError) as exc:
        raise SearchError(f"ray base point not calibratable: {exc}")

    best = None
    for idx, alpha in enumerate(alphas):
        K = alpha * K0
        try:
            an = lti.analyze_closed_loop(sys.A, sys.H, K, sys.Q, sys.R)
        except InstabilityError:
            continue
        index = hrisk_index(hrisk_factors(an), config)
        objective = float(np.trace(an.S)) + lam * index
        key = (objective, alpha, idx)  # equal objectives -> smaller alpha
        if best is None or key < best[0]:
            best = (key, alpha, K, objective)
    if best is None:
        raise SearchError("all grid points are unstable")
    return best[1], best[2], best[3]
