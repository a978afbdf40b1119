import numpy as np
import pytest

from twosample_el import TwoSampleData
from twosample_el.simulate import chisq1_vs_normal, chisq3_vs_exponential


@pytest.fixture
def canonical_1d():
    """The worked 2x2 instance: X = {0, 1}, Y = {2, 3}; feasible span [1, 3], MELE 2."""
    return TwoSampleData(np.array([0.0, 1.0]), np.array([2.0, 3.0]))


@pytest.fixture
def example1_20():
    """Seeded m = n = 20 draw from the chi-square(1) vs standard-normal pair."""
    x_dist, y_dist = chisq1_vs_normal()
    rng = np.random.default_rng(20260810)
    return TwoSampleData(x_dist.sample(20, rng), y_dist.sample(20, rng))


@pytest.fixture
def example2_20():
    """Seeded m = n = 20 draw from the chi-square(3) vs exponential pair."""
    x_dist, y_dist = chisq3_vs_exponential()
    rng = np.random.default_rng(123)
    return TwoSampleData(x_dist.sample(20, rng), y_dist.sample(20, rng))


def random_small_1d(rng):
    """Random d=1 instance with 2..5 points per sample, well-spread."""
    m = int(rng.integers(2, 6))
    n = int(rng.integers(2, 6))
    while True:
        x = rng.normal(0.0, 1.0, m)
        y = rng.normal(1.0, 1.0, n)
        if np.ptp(x) > 0.1 and np.ptp(y) > 0.1:
            return TwoSampleData(x, y)
