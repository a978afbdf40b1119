"""Anatomy of the similarity mapping behind the extended ratio.

Shows the expansion factor, the forward map, its ray-wise inverse, and the
round trip, then the shrinking pull-back distance as samples grow (the
mechanism that keeps the extended ratio asymptotically chi-square).
"""

import numpy as np

from twosample_el import (
    MappingSpec,
    TwoSampleData,
    expansion_factor,
    forward_map,
    inverse_map,
    oel_logratio,
)
from twosample_el.simulate import StudyConfig, chisq1_vs_normal, mapping_distance_study

rng = np.random.default_rng(3)
X = rng.chisquare(1, size=(20, 2))
Y = rng.normal(size=(20, 2))
data = TwoSampleData(X, Y)
theta_hat = data.mele()
spec = MappingSpec.first_order()

theta = theta_hat + np.array([0.5, 0.3])
l = oel_logratio(data, theta)
gam = expansion_factor(data.N, l, spec)
image = forward_map(data, theta, spec)
print(f"l(theta) = {l:.4f}, expansion factor gamma = {gam:.6f}")
print("theta        :", np.round(theta, 6))
print("forward image:", np.round(image, 6))

inv = inverse_map(data, image, spec)
print("inverse of image:", np.round(inv.theta_prime, 6), f"(ray parameter s = {inv.s:.6f})")
print("round-trip error:", float(np.abs(forward_map(data, inv.theta_prime, spec) - image).max()))
print()

# how far the inverse pulls the true difference, as m = n grows
x_dist, y_dist = chisq1_vs_normal()
config = StudyConfig(x_dist, y_dist, (20, 40, 80), (20, 40, 80), reps=200, seed=1)
result = mapping_distance_study(config)
for n, med in zip(result.sizes, result.medians):
    print(f"m = n = {n:3d}: median pull-back distance {med:.2e}")
print(f"log-log slope: {result.slope:.2f} (theory: about -1.5)")
