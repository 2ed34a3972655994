import numpy as np
import pytest

from mdreg import RegressionData, build_pair_tables, default_weights


@pytest.fixture
def two_point_data():
    """The hand-checkable fixture: x = (1, 1)', y = (1, 3), weights = x.

    Its distance is 2|1-b| + 4|2-b| + 2|3-b| - 4, minimized exactly at 2.
    """
    return RegressionData(x=[[1.0], [1.0]], y=[1.0, 3.0])


@pytest.fixture
def two_point_tables(two_point_data):
    return build_pair_tables(two_point_data, default_weights(two_point_data))


def random_instance(seed, max_n=15, max_p=4, min_n=1, duplicates=True, mixed_weights=True):
    """Random (data, weights, b) triple; optionally duplicates a row to
    manufacture exact kink ties."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(min_n, max_n + 1))
    p = int(rng.integers(1, max_p + 1))
    x = rng.normal(size=(n, p))
    beta = rng.normal(size=p)
    y = x @ beta + rng.normal(size=n)
    if duplicates and n >= 3 and rng.random() < 0.5:
        x[1] = x[0]
        y[1] = y[0]
    data = RegressionData(x=x, y=y)
    if mixed_weights and rng.random() < 0.5:
        w = rng.normal(size=(n, p))
    else:
        w = default_weights(data)
    b = rng.normal(size=p)
    return data, np.asarray(w), b
