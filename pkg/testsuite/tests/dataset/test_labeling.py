import numpy as np
import pytest

from mvqa.core.types import BoundingBox, Detection, ImageRef
from mvqa.core.utils import KeyCounter
from mvqa.dataset.labeling import (
    autolabel_frames, dedup_plate_frames, extract_crops, select_face_pairs,
    snapped_window
)
from mvqa.dataset.manifest import LabeledFrame, Variant
from testsuite_support.fakes import ScriptedDetector, ScriptedRecognizer


def image(path, value=0, shape=(20, 20)):
    return ImageRef.from_array(np.full(shape, value, dtype=np.uint8),
                               path=path)


def det(conf, box=(2, 2, 8, 8), cls=0):
    return Detection(BoundingBox(*box), cls, conf)


class TestAutolabel(object):
    def test_confidence_and_gap(self):
        frames = [image('f{}.png'.format(i)) for i in range(6)]
        detector = ScriptedDetector({
            'f0.png': [det(0.5)],
            'f1.png': [det(0.9), det(0.6, (10, 10, 14, 14))],
            'f2.png': [det(0.95)],
            'f3.png': [det(0.99)],
            'f4.png': [det(0.8)],
        })
        counter = KeyCounter()
        labeled = autolabel_frames(frames, detector, conf_threshold=0.7,
                                   min_gap=2, counter=counter)

        assert [f.frame_id for f in labeled] == ['f1', 'f3']
        assert [len(f.detections) for f in labeled] == [1, 1]
        assert all(d.confidence >= 0.7 for f in labeled
                   for d in f.detections)
        # Frames within the gap are never run through the detector.
        assert detector.calls == ['f0.png', 'f1.png', 'f3.png', 'f5.png']
        assert counter.as_dict() == {'within_gap': 2,
                                     'no_confident_detection': 2}

    def test_threshold_is_inclusive(self):
        detector = ScriptedDetector({'a.png': [det(0.7)]})
        assert len(autolabel_frames([image('a.png')], detector, 0.7)) == 1

    def test_invalid_gap(self):
        with pytest.raises(ValueError):
            autolabel_frames([], ScriptedDetector({}), min_gap=0)

    def test_frame_ids_without_paths(self):
        frames = [ImageRef.from_array(np.zeros((4, 4), dtype=np.uint8))]

        class Always(ScriptedDetector):
            def detect(self, image):
                return [det(1.0, (0, 0, 2, 2))]

        assert autolabel_frames(frames, Always({}))[0].frame_id == \
            'frame000000'


class TestSnappedWindow(object):
    def test_snaps_outward(self):
        box = BoundingBox(1.5, 2.0, 10.25, 8.0)
        assert snapped_window(box, 20, 20) == ((1, 2, 11, 8), False)

    def test_clips(self):
        box = BoundingBox(1.5, 2.0, 10.25, 8.0)
        assert snapped_window(box, 10, 20) == ((1, 2, 10, 8), True)

    def test_padding(self):
        box = BoundingBox(10, 10, 20, 20)
        assert snapped_window(box, 40, 40, 0.5) == ((5, 5, 25, 25), False)
        assert snapped_window(box, 22, 40, 0.5) == ((5, 5, 22, 25), True)
        with pytest.raises(ValueError):
            snapped_window(box, 40, 40, -0.1)


def plate_frame(frame_id, count=1):
    dets = tuple(det(1.0, (1 + 6 * k, 1, 5 + 6 * k, 5)) for k in range(count))
    return LabeledFrame(frame_id, image(frame_id + '.png'), dets)


def test_dedup_plate_frames():
    frames = [plate_frame('a'), plate_frame('b'), plate_frame('c'),
              plate_frame('d', 0), plate_frame('e', 2)]
    recognizer = ScriptedRecognizer([
        ('ABC123', 1.0), ('ABC124', 1.0), ('XYZ999', 0.9),
        ('QQQ111', 1.0), ('RRR222', 1.0),
    ])
    counter = KeyCounter()
    kept = dedup_plate_frames(frames, recognizer, 1, counter)

    assert [f.frame_id for f in kept] == ['a', 'e']
    assert [s.chars for s in kept[0].plate_strings] == ['ABC123']
    assert [s.chars for s in kept[1].plate_strings] == ['QQQ111', 'RRR222']
    assert counter.as_dict() == {'duplicate_plate': 1, 'no_plate': 1,
                                 'not_fully_recognized': 1}
    assert recognizer.answers == []


def test_dedup_distance_zero_keeps_near_duplicates():
    frames = [plate_frame('a'), plate_frame('b')]
    recognizer = ScriptedRecognizer([('ABC123', 1.0), ('ABC124', 1.0)])
    assert len(dedup_plate_frames(frames, recognizer, 0)) == 2


class TestFacePairs(object):
    def persons(self):
        return {
            'p1': [image('p1/a.png'), image('p1/b.png'), image('p1/c.png')],
            'p2': [image('p2/a.png'), image('p2/b.png')],
            'p3': [image('p3/a.png')],
        }

    def detector(self):
        return ScriptedDetector({
            'p1/a.png': [det(0.9)],
            'p1/b.png': [det(0.95), det(0.2, (10, 10, 12, 12))],
            'p1/c.png': [det(0.5)],
            'p2/a.png': [det(0.8)],
            'p2/b.png': [det(0.8)],
        }, task='face')

    def test_selection(self, captured_log):
        counter = KeyCounter()
        pairs = select_face_pairs(self.persons(), self.detector(), seed=3,
                                  counter=counter)

        assert [p.person_id for p in pairs] == ['p1', 'p2']
        assert pairs[0].database.path == 'p1/b.png'
        assert pairs[0].query.path in ('p1/a.png', 'p1/c.png')
        # Equal confidences: the lower path is the database image.
        assert pairs[1].database.path == 'p2/a.png'
        assert pairs[1].query.path == 'p2/b.png'
        assert counter.as_dict() == {'too_few_images': 1}
        assert 'person skipped' in captured_log.getvalue()

    def test_deterministic(self):
        first = select_face_pairs(self.persons(), self.detector(), seed=3)
        second = select_face_pairs(self.persons(), self.detector(), seed=3)
        assert [p.query.path for p in first] == [p.query.path for p in second]

    def test_query_varies_with_seed(self):
        queries = {
            select_face_pairs(self.persons(), self.detector(), s)[0]
            .query.path
            for s in range(32)
        }
        assert queries == {'p1/a.png', 'p1/c.png'}


def test_extract_crops():
    reference = (np.arange(400) % 256).astype(np.uint8).reshape(20, 20)
    distorted = 255 - reference
    frame = LabeledFrame(
        'f', ImageRef.from_array(reference),
        (det(1.0, (2, 3, 8, 9)), det(1.0, (15, 15, 20, 20))),
        variants=(Variant('jpeg', 50, ImageRef.from_array(distorted), 30.0),)
    )
    crops = extract_crops(frame, padding_fraction=0.0)

    assert [c.object_id for c in crops] == [0, 1]
    assert crops[0].window == (2, 3, 8, 9)
    assert np.array_equal(crops[0].reference, reference[3:9, 2:8])
    codec, qf, pixels = crops[0].variants[0]
    assert (codec, qf) == ('jpeg', 50)
    assert np.array_equal(pixels, distorted[3:9, 2:8])

    padded = extract_crops(frame, padding_fraction=0.5)
    assert padded[0].window == (0, 0, 11, 12)
    assert padded[1].window == (12, 12, 20, 20)
    assert padded[1].reference.shape == padded[1].variants[0][2].shape
