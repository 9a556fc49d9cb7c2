import numpy as np
import pytest

from dpreg import Dataset, RandomStream


@pytest.fixture
def three_point_line() -> Dataset:
    # y = 0.5 x + 0.2 sampled at x = 0, 0.5, 1; OLS solution is exact.
    return Dataset(np.array([0.0, 0.5, 1.0]), np.array([0.2, 0.45, 0.7]))


@pytest.fixture
def random_dataset():
    """Factory for non-degenerate random datasets in the unit square."""

    def make(seed: int, n: int = 120, alpha: float = 0.4, beta: float = 0.3,
             sigma: float = 0.05) -> Dataset:
        g = RandomStream(seed, 0)
        x = g.uniform(n)
        y = np.clip(alpha * x + beta + sigma * g.normal(n), 0.0, 1.0)
        return Dataset(x, y)

    return make
