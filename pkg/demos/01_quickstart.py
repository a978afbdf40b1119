"""Quickstart: the log-likelihood ratio surface for a two-sample mean difference.

Draws a small bivariate dataset, evaluates the original ratio (finite only
inside the feasible region), the extended ratio (finite everywhere), and
tests a few hypotheses.
"""

import numpy as np

from twosample_el import (
    Method,
    TwoSampleData,
    classify_feasibility,
    compute_diagnostics,
    contains,
    eel_logratio,
    oel_logratio,
)

rng = np.random.default_rng(1)
X = rng.chisquare(1, size=(20, 2))       # sample one: skewed
Y = rng.normal(size=(20, 2))             # sample two: standard normal
data = TwoSampleData(X, Y)

diag = compute_diagnostics(data)
print("sample one mean:", np.round(diag.mean_x, 3))
print("sample two mean:", np.round(diag.mean_y, 3))
print("estimated mean difference (MELE):", np.round(diag.mele, 3))
print("covariances full rank:", diag.rank_ok)
print()

# the true difference for these populations is (-1, -1)
theta0 = np.array([-1.0, -1.0])
print("feasibility of theta0:", classify_feasibility(data, theta0).classification.value)
print("original ratio  l(theta0)  =", round(oel_logratio(data, theta0), 4))
print("extended ratio  l*(theta0) =", round(eel_logratio(data, theta0), 4))
print()

# far outside the data hull the original ratio is infinite, the extended
# ratio is still informative
far = diag.mele + np.array([25.0, 25.0])
print("original ratio at a far point: ", oel_logratio(data, far))
print("extended ratio at a far point: ", round(eel_logratio(data, far), 2))
print()

for method in (Method.oel(), Method.eel1()):
    verdict = contains(data, theta0, 0.05, method)
    print(f"95% {method.name} region contains theta0: {verdict}")
