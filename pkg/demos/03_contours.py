"""Radial 95% confidence contours in two dimensions.

Writes the original and extended contours as CSV polylines (columns
phi, r, theta1, theta2) for external plotting, and prints the per-angle
radius ratio: the extended contour is an exact radial enlargement of the
original one, so the ratio is the same at every angle.
"""

import numpy as np

from twosample_el import Method, TwoSampleData, chisq_quantile, contour_2d, polyline_to_csv

rng = np.random.default_rng(11)
X = rng.chisquare(1, size=(20, 2))
Y = rng.normal(size=(20, 2))
data = TwoSampleData(X, Y)

level = chisq_quantile(2, 0.95)
oel = contour_2d(data, level, Method.oel(), n_angles=72)
eel = contour_2d(data, level, Method.eel1(), n_angles=72)

with open("contour_oel.csv", "w", encoding="utf-8") as fh:
    fh.write(polyline_to_csv(oel))
with open("contour_eel1.csv", "w", encoding="utf-8") as fh:
    fh.write(polyline_to_csv(eel))
print("wrote contour_oel.csv and contour_eel1.csv (72 angles each)")

r_oel = np.array([r for _, r, _ in oel.d2_polyline])
r_eel = np.array([r for _, r, _ in eel.d2_polyline])
ratios = r_eel / r_oel
print(f"radius ratio over angles: min={ratios.min():.8f} max={ratios.max():.8f}")
print(f"expected constant 1 + level/(2N) = {1 + level / (2 * data.N):.8f}")
print("center (MELE):", np.round(oel.center, 4))
