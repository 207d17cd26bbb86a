"""Seeded trajectory simulation and innovation-based calibration statistics.

The truth evolves as x' = A x + w, y = H x + v; the filter runs the
fixed-gain observer recursion ``xhat' = A xhat + K (y - H xhat)`` so the
estimation-error matrix is exactly ``A - K H`` and the steady error
covariance solves ``P = Phi P Phi.T + Q + K R K.T``.

Reproducibility contract (recorded in every CSV header):
  * PRNG: numpy Philox (counter-based), keyed by the run seed.
  * Gaussian transform: Box-Muller, trigonometric form (no rejection),
    on ``1 - uniform`` draws so log(0) cannot occur.
  * Stream layout: one flat vector of normals per run; the first
    ``steps*n`` entries form the process noise rows, the next ``steps*d``
    the measurement noise rows.
  * Burn-in: the first ``burn_in`` steps (default 100) are discarded from
    all statistics; ``T`` counts retained steps.
Identical RunConfig (seed included) therefore reproduces the byte-exact
z^2 sequence.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.special

from . import lti
from . import matrices as mx
from .exceptions import (
    DivergenceError,
    InstabilityError,
    ValidationError,
)

__all__ = [
    "PRNG_NAME",
    "GAUSSIAN_TRANSFORM",
    "DEFAULT_BURN_IN",
    "RunConfig",
    "Trajectory",
    "NisSeries",
    "gaussian_stream",
    "simulate_run",
    "nis_stats",
    "chi2_quantile",
    "apply_gate",
]

PRNG_NAME = "philox4x64"
GAUSSIAN_TRANSFORM = "box-muller-trig"
DEFAULT_BURN_IN = 100
STATE_OVERFLOW = 1e12


@dataclass(frozen=True)
class RunConfig:
    """One simulation run: plant, filter, horizon and reporting knobs.

    ``T`` counts post-burn-in steps.  ``x0`` defaults to the origin;
    ``P0`` defaults to the filter's believed steady covariance and is
    recorded for completeness (a fixed-gain run never consumes it).
    """

    seed: int
    T: int
    sys: lti.LtiSystem
    filt: lti.FilterSpec
    x0: Optional[np.ndarray] = None
    P0: Optional[np.ndarray] = None
    q: float = 0.99
    gate_p: float = 0.99
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.T < 1:
            raise ValidationError("T must be >= 1")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")
        if not (0.0 < self.q < 1.0):
            raise ValidationError("q must lie in (0, 1)")
        if not (0.0 < self.gate_p < 1.0):
            raise ValidationError("gate_p must lie in (0, 1)")


@dataclass(frozen=True)
class Trajectory:
    """Post-burn-in trajectories; rows are time steps."""

    x: np.ndarray
    y: np.ndarray
    xhat: np.ndarray
    innovations: np.ndarray
    s_believed: np.ndarray


@dataclass(frozen=True)
class NisSeries:
    """Normalized innovation squared statistics for one run."""

    z2: np.ndarray
    nis_mean: float
    nis_q: float
    q: float
    gated_fraction: float
    gamma: float
    accept: np.ndarray = field(repr=False, default=None)


def gaussian_stream(seed, count):
    """``count`` standard normals from the documented Philox/Box-Muller stream."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
    pairs = (count + 1) // 2
    u = rng.random(size=2 * pairs)
    u1 = 1.0 - u[0::2]  # in (0, 1]
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:count]


def _chol_or_zero(m, name):
    m = mx.as_matrix(m, name)
    if not np.any(m):
        return np.zeros_like(m)
    eig = np.linalg.eigvalsh(m)
    if eig[0] < -1e-12 * max(1.0, abs(float(eig[-1]))):
        raise ValidationError(f"{name} must be positive semidefinite")
    # tiny jitter keeps Cholesky defined for rank-deficient PSD inputs
    jitter = 0.0 if eig[0] > 0 else (abs(eig[0]) + 1e-18 * max(1.0, eig[-1]))
    return np.linalg.cholesky(m + jitter * np.eye(m.shape[0]))


def simulate_run(cfg):
    """Simulate one run and score its normalized innovations.

    Returns ``(Trajectory, NisSeries)``.  The believed innovation
    covariance that normalizes z^2 comes from
    :func:`epistab.lti.believed_innovation_covariance` and is constant
    over the run, matching the frozen-gain filter.

    Raises
    ------
    InstabilityError
        If the resolved gain leaves rho(A - K H) >= 1.
    DivergenceError
        If any state magnitude exceeds 1e12 (carries the step index).
    """
    sys, filt = cfg.sys, cfg.filt
    K = lti.resolve_gain(sys, filt)
    phi = lti.closed_loop(sys.A, sys.H, K)
    rho = mx.spectral_radius(phi)
    if rho >= 1.0:
        raise InstabilityError(
            f"cannot simulate an unstable loop: rho = {rho:.6g}", rho=rho
        )
    s_believed = lti.believed_innovation_covariance(sys, filt)
    s_inv = np.linalg.inv(s_believed)

    n, d = sys.n, sys.d
    steps = cfg.T + cfg.burn_in
    normals = gaussian_stream(cfg.seed, steps * (n + d))
    w = normals[: steps * n].reshape(steps, n) @ _chol_or_zero(sys.Q, "Q").T
    v = normals[steps * n :].reshape(steps, d) @ _chol_or_zero(sys.R, "R").T

    # plain-float inner loop: ~10x faster than per-step numpy at n=2
    A_r = [list(map(float, row)) for row in sys.A]
    H_r = [list(map(float, row)) for row in sys.H]
    K_r = [list(map(float, row)) for row in K]
    Sin = [list(map(float, row)) for row in s_inv]
    w_r = w.tolist()
    v_r = v.tolist()
    x = [0.0] * n if cfg.x0 is None else list(map(float, np.ravel(cfg.x0)))
    if len(x) != n:
        raise ValidationError(f"x0 must have length {n}")
    xh = [0.0] * n

    xs = []
    ys = []
    xhs = []
    rs = []
    z2 = np.empty(steps)
    rng_n, rng_d = range(n), range(d)
    for t in range(steps):
        vt = v_r[t]
        wt = w_r[t]
        y = [0.0] * d
        r = [0.0] * d
        for i in rng_d:
            hi = H_r[i]
            hx = 0.0
            hxh = 0.0
            for j in rng_n:
                hij = hi[j]
                hx += hij * x[j]
                hxh += hij * xh[j]
            yi = hx + vt[i]
            y[i] = yi
            r[i] = yi - hxh
        z = 0.0
        for i in rng_d:
            ri = r[i]
            si = Sin[i]
            for j in rng_d:
                z += ri * si[j] * r[j]
        xs.append(x)
        ys.append(y)
        xhs.append(xh)
        rs.append(r)
        z2[t] = z
        x_next = [0.0] * n
        xh_next = [0.0] * n
        for i in rng_n:
            ai = A_r[i]
            ax = 0.0
            axh = 0.0
            for j in rng_n:
                aij = ai[j]
                ax += aij * x[j]
                axh += aij * xh[j]
            kr = 0.0
            ki = K_r[i]
            for k in rng_d:
                kr += ki[k] * r[k]
            xi = ax + wt[i]
            if xi > STATE_OVERFLOW or xi < -STATE_OVERFLOW:
                raise DivergenceError(f"state overflow at step {t}", step=t)
            x_next[i] = xi
            xh_next[i] = axh + kr
        x = x_next
        xh = xh_next

    keep = slice(cfg.burn_in, None)
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    xhs = np.asarray(xhs)
    rs = np.asarray(rs)
    z2_kept = z2[keep]
    mean, quant = nis_stats(z2_kept, cfg.q)
    gamma = chi2_quantile(d, cfg.gate_p)
    accept, gated = apply_gate(z2_kept, gamma)
    traj = Trajectory(
        x=xs[keep],
        y=ys[keep],
        xhat=xhs[keep],
        innovations=rs[keep],
        s_believed=s_believed,
    )
    series = NisSeries(
        z2=z2_kept,
        nis_mean=mean,
        nis_q=quant,
        q=cfg.q,
        gated_fraction=gated,
        gamma=gamma,
        accept=accept,
    )
    return traj, series


def nis_stats(z2, q):
    """Mean and type-7 (linear interpolation) empirical quantile of z^2."""
    z2 = np.asarray(z2, dtype=float)
    if z2.size == 0:
        raise ValidationError("z2 must be non-empty")
    if not (0.0 < q < 1.0):
        raise ValidationError("q must lie in (0, 1)")
    return float(z2.mean()), float(np.quantile(z2, q))


def chi2_quantile(d, p):
    """Inverse CDF of the chi-square distribution with ``d`` dof."""
    if d < 1 or int(d) != d:
        raise ValidationError("d must be a positive integer")
    if not (0.0 < p < 1.0):
        raise ValidationError("p must lie in (0, 1)")
    return float(2.0 * scipy.special.gammaincinv(0.5 * d, p))


def apply_gate(z2, gamma):
    """Accept flags ``z2 <= gamma`` and the rejected fraction.

    Reporting only: gating never feeds back into the filter recursion.
    """
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    z2 = np.asarray(z2, dtype=float)
    accept = z2 <= gamma
    gated_fraction = float(1.0 - accept.mean()) if z2.size else 0.0
    return accept, gated_fraction
