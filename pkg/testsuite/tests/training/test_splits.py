import numpy as np
import pytest

from mvqa.core.types import ImageRef
from mvqa.dataset.manifest import LabeledFrame, Manifest, check_split_hygiene
from mvqa.training.splits import make_splits


def manifest(n):
    image = ImageRef.from_array(np.zeros((2, 2), dtype=np.uint8))
    return Manifest('object', tuple(
        LabeledFrame('f{:03d}'.format(i), image) for i in range(n)
    ), seed=0)


def counts(m):
    return tuple(len(m.in_split(s)) for s in ('train', 'val', 'test'))


def test_default_fractions():
    split = make_splits(manifest(50), seed=3)
    assert counts(split) == (40, 10, 0)
    check_split_hygiene(split)


def test_test_split_takes_the_rest():
    assert counts(make_splits(manifest(50), (0.6, 0.2))) == (30, 10, 10)
    assert counts(make_splits(manifest(7), (1.0, 0.0))) == (7, 0, 0)


def test_deterministic():
    a = make_splits(manifest(30), seed=1)
    b = make_splits(manifest(30), seed=1)
    c = make_splits(manifest(30), seed=2)
    assert a == b
    assert [f.split for f in a.frames] != [f.split for f in c.frames]


def test_frame_order_does_not_matter():
    m = manifest(20)
    shuffled = m.with_frames(reversed(m.frames))
    a = {f.frame_id: f.split for f in make_splits(m, seed=4).frames}
    b = {f.frame_id: f.split for f in make_splits(shuffled, seed=4).frames}
    assert a == b


@pytest.mark.parametrize('fractions', [
    (0.9, 0.2), (-0.1, 0.5), (0.5, -0.1), (0.0, 0.5),
])
def test_invalid_fractions(fractions):
    with pytest.raises(ValueError):
        make_splits(manifest(10), fractions)


def test_empty_val_split():
    with pytest.raises(ValueError):
        make_splits(manifest(3), (0.9, 0.1))
