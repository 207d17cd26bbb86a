"""Tour of the statistics layer.

Theil-Sen shrugging off corrupted points, BCa bootstrap intervals on a
skewed sample, step-up false-discovery-rate control, and the two effect
sizes used for paired comparisons.
"""

import numpy as np

from epistab import (
    PairedSample,
    bca_ci,
    bh_fdr,
    cliffs_delta,
    hedges_g,
    ols_fit,
    pearson,
    spearman,
    theil_sen,
)

x = np.arange(1.0, 13.0)
y = 2.0 * x + 1.0
y[[2, 7, 10]] = 300.0  # three wrecked measurements
sample = PairedSample(x, y)
print("line y = 2x + 1 with 3 of 12 points wrecked:")
print(f"  OLS slope       = {ols_fit(sample)[0]:8.3f}   (dragged away)")
print(f"  Theil-Sen slope = {theil_sen(sample):8.3f}   (median of pairs)")
print(f"  pearson={pearson(sample):.3f}  spearman={spearman(sample):.3f}")

rng = np.random.default_rng(42)
skewed = rng.exponential(scale=2.0, size=60)
for stat in ("mean", "median"):
    est = bca_ci(skewed, stat, level=0.95, n_boot=1000, seed=9)
    print(f"\nBCa 95% interval for the {stat} of an exponential sample:"
          f"  {est.point:.3f}  [{est.lo:.3f}, {est.hi:.3f}]")

p_values = [0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.3, 0.9]
reject, adjusted = bh_fdr(p_values, q=0.05)
print("\nBenjamini-Hochberg at q = 0.05:")
for p, r, a in zip(p_values, reject, adjusted):
    print(f"  p={p:<6} adjusted={a:.4f}  {'reject' if r else 'keep'}")

a = rng.normal(1.0, 1.0, size=40)
b = rng.normal(0.2, 1.0, size=40)
print("\ntwo shifted normal samples:")
print(f"  Cliff's delta = {cliffs_delta(a, b):.3f}")
print(f"  Hedges' g     = {hedges_g(a, b):.3f}")
