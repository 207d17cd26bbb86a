"""Anatomy of one closed estimation loop.

Builds the two-state baseline plant, tunes its steady-state gain, and
walks through everything the analysis layer derives from the loop matrix
A - K H: spectral radius, conditioning, integrated sensitivity, steady
covariance, innovation amplification, and the composite instability
index.  Ends with the critique trade-off: how a penalty on instability
moves the preferred gain along the ray alpha * K0.
"""

import numpy as np

from epistab import (
    FilterSpec,
    GainRay,
    analyze_closed_loop,
    calibrate_constants,
    critique_gain_search,
    dare_gain,
    hrisk_factors,
    hrisk_index,
)
from epistab.sweeps import b1_system

sys = b1_system(sigma_w=3e-2, sigma_v=1e-2)
print("plant A:\n", sys.A)
print("sensing H:", sys.H, " noise scales: sigma_w=0.03 sigma_v=0.01")

K0, P_pred = dare_gain(sys)
print("\nsteady-state gain K0:", np.round(K0.ravel(), 5))
print("predicted covariance:\n", P_pred)

base = analyze_closed_loop(sys.A, sys.H, K0, sys.Q, sys.R)
print("\nclosed loop Phi = A - K0 H:\n", np.round(base.phi, 5))
print(f"rho(Phi)       = {base.rho:.5f}   (Schur-stable while < 1)")
print(f"kappa(Phi)     = {base.kappa:.3f}")
print(f"int. sens.     = {base.int_sens:.4f}  (gain of the Lyapunov map)")
print(f"innovation amp = {base.ia:.4f}  (tr(HPH')/tr(R))")

config = calibrate_constants(base, base_point="ray alpha=1")
print("\nunit-scaling constants:",
      {k: round(config.constant(k), 6)
       for k in ("margin", "kappa", "int_sens", "ia")})
print("index at the base point:",
      hrisk_index(hrisk_factors(base), config))

print("\npushing the gain along alpha * K0:")
for alpha in (1.0, 1.4, 1.8, 2.1):
    an = analyze_closed_loop(sys.A, sys.H, alpha * K0, sys.Q, sys.R)
    idx = hrisk_index(hrisk_factors(an), config)
    print(f"  alpha={alpha:<4} rho={an.rho:.4f} kappa={an.kappa:7.3f} "
          f"index={idx:10.3f}")

filt = FilterSpec(Q=sys.Q, R=sys.R, gain_policy=GainRay(K0=K0))
grid = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
print("\ncritique objective tr(S) + lambda * index over the ray:")
for lam in (0.0, 1e-4, 1e-2):
    alpha, _, objective = critique_gain_search(sys, filt, lam, grid)
    print(f"  lambda={lam:<8} -> alpha*={alpha}  objective={objective:.6f}")
