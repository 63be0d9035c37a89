import math

import numpy as np
import pytest

from mvqa.core.errors import InvalidEmbeddingError
from mvqa.core.similarity import cosine_similarity, iou
from mvqa.core.types import BoundingBox, EmbeddingVector
from testsuite_support.oracles import OracleTest, raster_iou


def random_box(rng, extent=20):
    x0, y0 = rng.integers(0, extent - 1, size=2)
    x1 = rng.integers(x0 + 1, extent + 1)
    y1 = rng.integers(y0 + 1, extent + 1)
    return BoundingBox(float(x0), float(y0), float(x1), float(y1))


class IouOracleTest(OracleTest):
    def instances(self, rng):
        while True:
            yield random_box(rng), random_box(rng)

    def concrete(self, a, b):
        return raster_iou(a, b)

    def implementation(self, a, b):
        return iou(a, b)


def test_iou_against_raster():
    IouOracleTest().run()


@pytest.mark.parametrize('a, b, expected', [
    ((0, 0, 10, 10), (0, 0, 10, 10), 1.0),
    ((0, 0, 10, 10), (20, 20, 30, 30), 0.0),
    ((0, 0, 10, 10), (5, 0, 15, 10), 1.0 / 3.0),
    ((0, 0, 10, 10), (10, 0, 20, 10), 0.0),
])
def test_iou_examples(a, b, expected):
    assert iou(BoundingBox(*a), BoundingBox(*b)) == pytest.approx(
        expected, abs=1e-15
    )


def test_iou_invariants():
    rng = np.random.default_rng(1)
    for _ in range(500):
        a = BoundingBox(*(rng.uniform(0, 50, 2).tolist() +
                          rng.uniform(51, 100, 2).tolist()))
        b = BoundingBox(*(rng.uniform(0, 50, 2).tolist() +
                          rng.uniform(51, 100, 2).tolist()))
        assert iou(a, a) == 1.0
        assert iou(a, b) == iou(b, a)
        dx, dy = rng.uniform(0, 100, 2)
        assert abs(iou(a.translated(dx, dy), b.translated(dx, dy)) -
                   iou(a, b)) <= 1e-12


@pytest.mark.parametrize('a, b, expected', [
    ((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), 1.0),
    ((1.0, 0.0), (0.0, 1.0), 0.0),
    ((1.0, 1.0), (1.0, 0.0), 1.0 / math.sqrt(2.0)),
    ((1.0, 0.0), (-3.0, 0.0), -1.0),
])
def test_cosine_examples(a, b, expected):
    assert cosine_similarity(EmbeddingVector(a), EmbeddingVector(b)) == \
        pytest.approx(expected, abs=1e-15)


def test_cosine_invariants():
    rng = np.random.default_rng(2)
    for _ in range(500):
        u, v = rng.normal(size=(2, 16))
        s = cosine_similarity(u, v)
        assert -1.0 <= s <= 1.0
        assert s == pytest.approx(cosine_similarity(v, u), abs=1e-12)
        scale = rng.uniform(0.01, 100.0)
        assert s == pytest.approx(cosine_similarity(scale * u, v), abs=1e-9)
        assert cosine_similarity(u, u) == pytest.approx(1.0, abs=1e-15)


def test_cosine_errors():
    with pytest.raises(InvalidEmbeddingError):
        cosine_similarity(np.zeros(3), np.ones(3))
    with pytest.raises(InvalidEmbeddingError):
        cosine_similarity(np.ones(3), np.ones(4))
