"""Where a normal prior leaks probability into impossible poses.
================================================================

Reorient a one-sided joint distribution along its principal eigenvectors,
fit a 1D normal on the first principal component, and measure how much
probability mass lands outside the feasible range. The same analysis also
shows rare-but-valid limit poses being over-penalized.
"""

import numpy as np

from posepriors import (
    fit_normal_1d,
    fit_pca,
    histogram,
    infeasible_mass,
    reorient,
)

# A knee-like axis: flexion only one way (support x <= 0.1), correlated
# with a neighboring axis so the data cloud is rotated, not axis-aligned.
rng = np.random.default_rng(42)
flexion = 0.1 - rng.gamma(2.0, 0.5, 3000)
coupled = 0.4 * flexion + rng.normal(0.0, 0.2, 3000)
data = np.column_stack([flexion, coupled])

model = fit_pca(data)
print("covariance eigenvalues:", model.eigenvalues.round(4))

scores = reorient(model, data)[:, 0]  # first principal component
normal = fit_normal_1d(scores)
print(f"1D normal on PC1: mu={normal.mu:.4f} sigma={normal.sigma:.4f}")

hist = histogram(scores, bins=12)
peak = hist.counts.max()
print("\nPC1 histogram (each * is ~{} samples):".format(max(peak // 40, 1)))
for lo, hi, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
    bar = "*" * int(round(40 * count / peak))
    print(f"  [{lo:+7.3f}, {hi:+7.3f})  {bar}")

# Feasible PC1 range implied by the support boundary: project the boundary
# pose onto PC1 and everything beyond it is impossible.
boundary = reorient(model, np.array([[0.1, 0.4 * 0.1]]))[0, 0]
lo, hi = sorted((boundary, -1e9))
mass = infeasible_mass(normal, lo, hi)
print(f"\nprobability mass beyond the flexion boundary: {mass:.4f}")
print("(a normal prior would happily score those impossible poses)")

# And the flip side: physically valid limit poses get over-penalized.
q95 = float(np.quantile(scores, 0.05))  # deep-flexion tail of PC1
lp_median = float(np.median(normal.log_pdf(scores)))
lp_limit = float(normal.log_pdf(q95))
print(f"\nlog-density gap, median pose vs 5% limit pose: "
      f"{lp_median - lp_limit:.2f} nats")
