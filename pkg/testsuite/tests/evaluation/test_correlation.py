import numpy as np
import pytest

from mvqa.evaluation.correlation import plcc, srcc
from testsuite_support.oracles import (
    OracleTest, naive_pearson, naive_spearman
)


class SeriesOracleTest(OracleTest):
    """
    Short integer series, so that ties and constant series are frequent.
    """
    def instances(self, rng):
        while True:
            n = int(rng.integers(3, 12))
            high = int(rng.integers(1, 6))
            yield (rng.integers(0, high, size=n).tolist(),
                   rng.integers(0, 4, size=n).tolist())


class SrccOracleTest(SeriesOracleTest):
    def concrete(self, x, y):
        return naive_spearman(x, y)

    def implementation(self, x, y):
        return srcc(x, y)


class PlccOracleTest(SeriesOracleTest):
    def concrete(self, x, y):
        return naive_pearson(x, y)

    def implementation(self, x, y):
        return plcc(x, y)


def test_srcc_against_naive_ranks():
    SrccOracleTest(tolerance=1e-9).run()


def test_plcc_against_naive_sums():
    PlccOracleTest(tolerance=1e-9).run()


def test_known_values():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert srcc(x, [10, 20, 30, 40, 50]) == pytest.approx(1.0)
    assert srcc(x, [5, 4, 3, 2, 1]) == pytest.approx(-1.0)
    cubes = [v ** 3 for v in x]
    assert srcc(x, cubes) == pytest.approx(1.0)
    assert plcc(x, cubes) < 1.0
    assert srcc([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(
        naive_spearman([1, 2, 2, 3], [1, 2, 3, 4]))


def test_bounds():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x, y = rng.normal(size=(2, 20))
        assert -1.0 <= srcc(x, y) <= 1.0
        assert -1.0 <= plcc(x, y) <= 1.0


def test_constant_series(captured_log):
    assert srcc([1, 1, 1], [1, 2, 3]) is None
    assert plcc([1, 2, 3], [7, 7, 7]) is None
    assert 'undefined' in captured_log.getvalue()


@pytest.mark.parametrize('x, y', [
    ([1, 2], [1, 2]),
    ([1, 2, 3], [1, 2]),
    ([1, 2, float('nan')], [1, 2, 3]),
    ([1, 2, float('inf')], [1, 2, 3]),
])
def test_invalid_series(x, y):
    with pytest.raises(ValueError):
        srcc(x, y)
    with pytest.raises(ValueError):
        plcc(x, y)
