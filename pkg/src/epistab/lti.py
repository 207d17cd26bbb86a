"""Linear-Gaussian system model and closed-loop analysis.

Defines the true plant, the filter's beliefs and gain policy, the
closed-loop error matrix ``A - K H``, the steady-state gain from the
discrete algebraic Riccati equation, and the steady covariance and
innovation quantities derived from them.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matrices as mx
from .exceptions import (
    ConvergenceError,
    DimensionError,
    InstabilityError,
    ValidationError,
)

__all__ = [
    "LtiSystem",
    "FilterSpec",
    "FixedGain",
    "GainRay",
    "DarePerConfig",
    "ClosedLoopAnalysis",
    "closed_loop",
    "dare_gain",
    "analyze_closed_loop",
    "resolve_gain",
    "believed_innovation_covariance",
]

DARE_TOL = 1e-12
DARE_MAX_ITER = 10**6


def _check_psd(m, name):
    if not mx.is_symmetric(m):
        raise ValidationError(f"{name} must be symmetric")
    eig = np.linalg.eigvalsh(m)
    if eig.size and eig[0] < -1e-12 * max(1.0, abs(float(eig[-1]))):
        raise ValidationError(f"{name} must be positive semidefinite")


@dataclass(frozen=True)
class LtiSystem:
    """True plant: x' = A x + w, y = H x + v with w ~ N(0,Q), v ~ N(0,R)."""

    A: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", mx.as_matrix(self.A, "A"))
        object.__setattr__(self, "H", mx.as_matrix(self.H, "H"))
        object.__setattr__(self, "Q", mx.as_matrix(self.Q, "Q"))
        object.__setattr__(self, "R", mx.as_matrix(self.R, "R"))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionError("A must be square")
        d = self.H.shape[0]
        if self.H.shape != (d, n):
            raise DimensionError(f"H must be d x {n}, got {self.H.shape}")
        if self.Q.shape != (n, n):
            raise DimensionError(f"Q must be {n} x {n}")
        if self.R.shape != (d, d):
            raise DimensionError(f"R must be {d} x {d}")
        _check_psd(self.Q, "Q")
        _check_psd(self.R, "R")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.H.shape[0]


@dataclass(frozen=True)
class FixedGain:
    """Frozen reference gain, shared across a sweep."""

    K: np.ndarray
    label: str = "fixed_ref"


@dataclass(frozen=True)
class GainRay:
    """Gain ray alpha * K0; alpha >= 0 scales a base gain."""

    K0: np.ndarray
    alpha: float = 1.0
    label: str = "gain_ray"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError("gain ray requires alpha >= 0")


@dataclass(frozen=True)
class DarePerConfig:
    """Re-tune the gain per configuration from the filter's beliefs."""

    label: str = "dare_per_config"


@dataclass(frozen=True)
class FilterSpec:
    """Filter-side beliefs (Q, R) plus the gain policy."""

    Q: np.ndarray
    R: np.ndarray
    gain_policy: object = field(default_factory=DarePerConfig)

    def __post_init__(self):
        object.__setattr__(self, "Q", mx.as_matrix(self.Q, "Q_filt"))
        object.__setattr__(self, "R", mx.as_matrix(self.R, "R_filt"))
        _check_psd(self.Q, "Q_filt")
        _check_psd(self.R, "R_filt")
        eig = np.linalg.eigvalsh(self.R)
        if eig.size and eig[0] <= 0:
            raise ValidationError("R_filt must be positive definite")


@dataclass(frozen=True)
class ClosedLoopAnalysis:
    """Structural metrics of the loop Phi = A - K H under given (Q, R)."""

    phi: np.ndarray
    rho: float
    kappa: float
    int_sens: float
    P: np.ndarray
    S: np.ndarray
    ia: float


def closed_loop(A, H, K):
    """Closed-loop error matrix ``A - K @ H``."""
    A = mx.as_matrix(A, "A")
    H = mx.as_matrix(H, "H")
    K = mx.as_matrix(K, "K")
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionError("A must be square")
    if H.shape[1] != n:
        raise DimensionError(f"H must have {n} columns, got {H.shape}")
    if K.shape != (n, H.shape[0]):
        raise DimensionError(
            f"K must be {n} x {H.shape[0]}, got {K.shape}"
        )
    return A - K @ H


def dare_gain(A, H=None, Q=None, R=None):
    """Steady-state gain and predicted covariance from the filter DARE.

    Iterates the Riccati recursion
    ``P <- A P A.T - A P H.T (H P H.T + R)^-1 H P A.T + Q``
    from ``P = Q`` until the Frobenius change drops below ``DARE_TOL``,
    then returns ``K = P H.T (H P H.T + R)^-1`` and ``P``.

    Accepts either an :class:`LtiSystem` or the four matrices.

    Raises
    ------
    ConvergenceError
        If the iteration has not converged after ``DARE_MAX_ITER`` steps
        (undetectable pair); carries the last increment norm.
    """
    if isinstance(A, LtiSystem):
        sys = A
        A, H, Q, R = sys.A, sys.H, sys.Q, sys.R
    A = mx.as_matrix(A, "A")
    H = mx.as_matrix(H, "H")
    Q = mx.as_matrix(Q, "Q")
    R = mx.as_matrix(R, "R")
    P = Q.copy()
    delta = np.inf
    for _ in range(DARE_MAX_ITER):
        S = H @ P @ H.T + R
        G = mx.solve_linear(S, H @ P @ A.T)  # S^-1 H P A.T
        with np.errstate(over="ignore", invalid="ignore"):
            P_next = A @ P @ A.T - A @ P @ H.T @ G + Q
            P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)):
            raise ConvergenceError(
                "DARE iteration diverged (covariance overflow); "
                "is (A, H) detectable?",
                last_delta=delta,
            )
        delta = float(np.linalg.norm(P_next - P))
        P = P_next
        if delta <= DARE_TOL:
            break
    else:
        raise ConvergenceError(
            f"DARE iteration did not converge (last |dP| = {delta:.3e}); "
            "is (A, H) detectable?",
            last_delta=delta,
        )
    S = H @ P @ H.T + R
    K = mx.solve_linear(S, H @ P).T  # P H.T S^-1
    return K, P


def analyze_closed_loop(A, H, K, Q, R):
    """Structural analysis of the loop defined by (A, H, K) under (Q, R).

    Computes Phi = A - K H, its spectral radius and condition number, the
    integrated sensitivity ``||(I - Phi (x) Phi)^-1||_2``, the steady
    covariance ``P`` solving ``P = Phi P Phi.T + Q + K R K.T``, the
    innovation covariance ``S = H P H.T + R`` and the innovation
    amplification ``tr(H P H.T) / tr(R)``.

    Pass the true (Q, R) for the physical loop or the filter's believed
    pair for its self-assessment.

    Raises
    ------
    InstabilityError
        If rho(Phi) >= 1; the steady covariance does not exist.
    """
    phi = closed_loop(A, H, K)
    rho = mx.spectral_radius(phi)
    kappa = mx.condition_number(phi)
    if rho >= 1.0:
        raise InstabilityError(
            f"closed loop is unstable: rho = {rho:.6g}", rho=rho
        )
    n = phi.shape[0]
    lhs = np.eye(n * n) - mx.kronecker(phi, phi)
    # ||M^-1||_2 = 1 / sigma_min(M), avoiding the explicit inverse
    int_sens = 1.0 / float(np.linalg.svd(lhs, compute_uv=False)[-1])
    K = mx.as_matrix(K, "K")
    Q = mx.as_matrix(Q, "Q")
    R = mx.as_matrix(R, "R")
    sigma = Q + K @ R @ K.T
    P = mx.solve_discrete_lyapunov(phi, 0.5 * (sigma + sigma.T))
    H = mx.as_matrix(H, "H")
    HPH = H @ P @ H.T
    S = HPH + R
    tr_r = float(np.trace(R))
    if tr_r <= 0:
        raise ValidationError("tr(R) must be positive for the IA ratio")
    ia = float(np.trace(HPH)) / tr_r
    return ClosedLoopAnalysis(
        phi=phi, rho=rho, kappa=kappa, int_sens=int_sens, P=P, S=S, ia=ia
    )


def resolve_gain(sys, filt):
    """Resolve a gain policy to the constant K it prescribes.

    fixed_ref and gain_ray carry their gain explicitly; dare_per_config
    re-tunes from the filter's believed covariances on the current (A, H).
    """
    policy = filt.gain_policy
    if isinstance(policy, FixedGain):
        return mx.as_matrix(policy.K, "K")
    if isinstance(policy, GainRay):
        return policy.alpha * mx.as_matrix(policy.K0, "K0")
    if isinstance(policy, DarePerConfig):
        K, _ = dare_gain(sys.A, sys.H, filt.Q, filt.R)
        return K
    raise ValidationError(f"unknown gain policy: {policy!r}")


def believed_innovation_covariance(sys, filt):
    """The filter's own steady innovation covariance under its beliefs.

    A steady-state filter reports the confidence of its Riccati recursion
    run with (Q_filt, R_filt) on the current (A, H):
    ``S = H P_dare H.T + R_filt``.  For a correctly specified filter with
    the DARE gain this is the textbook steady innovation covariance.  Note
    the applied gain may be frozen elsewhere (fixed_ref); the belief does
    not depend on it.
    """
    _, P = dare_gain(sys.A, sys.H, filt.Q, filt.R)
    return sys.H @ P @ sys.H.T + filt.R
