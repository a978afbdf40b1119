"""Small Monte Carlo coverage study (a desk-scale version of the benchmark).

Simulates 95% coverage of the original and extended regions at the true
mean difference for the skewed-vs-normal pair, over a grid of sample sizes.
Full benchmark scale is reps=10_000; this demo uses 500 to finish quickly.
"""

import time

from twosample_el.simulate import StudyConfig, chisq1_vs_normal, coverage_study

x_dist, y_dist = chisq1_vs_normal()
config = StudyConfig(
    x_dist=x_dist,
    y_dist=y_dist,
    m_grid=(10, 20),
    n_grid=(10, 20),
    reps=500,
    alpha=0.05,
    methods=("oel", "eel1"),
    seed=42,
)

start = time.perf_counter()
table = coverage_study(config)
elapsed = time.perf_counter() - start

print(f"true difference theta0 = {config.theta0}")
print(f"{'m':>4} {'n':>4} {'method':>7} {'coverage':>9} {'mc_se':>7}")
for cell in table.cells:
    print(f"{cell.m:4d} {cell.n:4d} {cell.method:>7} {100 * cell.coverage:8.1f}% {100 * cell.mc_se:6.2f}%")
print(f"\n{config.reps} replicates per cell in {elapsed:.1f}s")
print("\nCSV form:\n" + table.to_csv_text())
