import numpy as np
import pytest

from mvqa.backends.synthetic import (
    SyntheticDetector, SyntheticEmbedder, SyntheticRecognizer
)
from mvqa.core.errors import BackendError
from mvqa.core.types import ImageRef
from mvqa.core.utils import KeyCounter
from mvqa.dataset.manifest import LabeledFrame, Manifest, Variant
from mvqa.dataset.synthetic import generate_corpus
from mvqa.training.targets import (
    FRAME_LEVEL, compute_targets, read_targets, required_roles,
    write_targets
)
from testsuite_support.fakes import MeanEmbedder


def unchanged_manifest(task, count=3):
    """
    A manifest whose variants are byte-identical to their source.
    """
    frames = []
    for s in generate_corpus(task, count, seed=0):
        image = ImageRef.from_array(s.pixels)
        frames.append(LabeledFrame(
            s.source_id, image, s.detections, s.plate_strings,
            (Variant('jpeg', 30, image, 100.0),
             Variant('jpeg', 90, image, 100.0)),
            split='train'
        ))
    return Manifest(task, tuple(frames), seed=0)


def face_manifest(persons=3):
    corpus = generate_corpus('face_recognition', persons, seed=0)
    frames = []
    for k in range(persons):
        database, query = corpus[3 * k], corpus[3 * k + 1]
        image = ImageRef.from_array(query.pixels)
        frames.append(LabeledFrame(
            query.person_id, image,
            variants=(Variant('jpeg', 50, image, 100.0),),
            person_id=query.person_id,
            database=ImageRef.from_array(database.pixels), split='train'
        ))
    return Manifest('face_recognition', tuple(frames), seed=0)


def values(rows, name):
    return [r['value'] for r in rows if r['target_name'] == name]


class TestUnchangedVariants(object):
    @pytest.mark.parametrize('task', ['object', 'face'])
    def test_detection(self, task):
        manifest = unchanged_manifest(task)
        rows = compute_targets(manifest, {'detector': SyntheticDetector(task)})

        objects = sum(len(f.detections) for f in manifest.frames)
        assert values(rows, 'delta_object_iou') == [0.0] * (2 * objects)
        assert values(rows, 'object_iou') == pytest.approx(
            [1.0] * (2 * objects), abs=1e-9)
        assert values(rows, 'mean_iou') == pytest.approx(
            [1.0] * (2 * len(manifest.frames)), abs=1e-9)
        assert all(r['object_id'] == FRAME_LEVEL for r in rows
                   if r['target_name'] == 'mean_iou')

    def test_plate(self):
        manifest = unchanged_manifest('plate')
        rows = compute_targets(manifest, {
            'detector': SyntheticDetector('plate'),
            'recognizer': SyntheticRecognizer(),
        })
        plates = sum(len(f.plate_strings) for f in manifest.frames)
        assert values(rows, 'jaro') == [1.0] * (2 * plates)
        assert values(rows, 'delta_object_iou') == [0.0] * (2 * plates)
        assert all(0.0 <= v <= 1.0 for v in values(rows, 'jaro_frame'))

    @pytest.mark.parametrize('embedder', [SyntheticEmbedder(), MeanEmbedder()])
    def test_face_recognition(self, embedder):
        rows = compute_targets(face_manifest(), {'embedder': embedder})
        assert values(rows, 'face_delta') == [0.0] * 3
        assert all(r['object_id'] == 0 for r in rows)


def test_rows_are_sorted():
    rows = compute_targets(unchanged_manifest('object'),
                           {'detector': SyntheticDetector('object')})
    keys = [(r['target_name'], r['frame_id'], r['object_id'], r['codec'],
             r['qf']) for r in rows]
    assert keys == sorted(keys)


def test_degraded_variants():
    manifest = unchanged_manifest('object', count=4)
    frames = []
    rng = np.random.default_rng(0)
    for f in manifest.frames:
        noisy = np.clip(f.source.load() + rng.normal(0, 60, size=(120, 160)),
                        0, 255).astype(np.uint8)
        frames.append(f.with_variants(
            [Variant('jpeg', 10, ImageRef.from_array(noisy), 12.0)]
        ))
    rows = compute_targets(manifest.with_frames(frames),
                           {'detector': SyntheticDetector('object')})
    deltas = values(rows, 'delta_object_iou')
    assert all(-1.0 <= d <= 1.0 for d in deltas)
    for d, iou in zip(deltas, values(rows, 'object_iou')):
        assert d == pytest.approx(1.0 - iou, abs=1e-9)


class FlakyDetector(SyntheticDetector):
    def __init__(self, broken):
        super(FlakyDetector, self).__init__('object')
        self.broken = broken

    def detect(self, image):
        if any(image is b for b in self.broken):
            raise RuntimeError('camera unplugged')
        return super(FlakyDetector, self).detect(image)


def test_backend_failures_are_counted(captured_log):
    manifest = unchanged_manifest('object', count=2)
    first, second = manifest.frames
    bad_variant = ImageRef.from_array(first.source.load())
    frames = (
        first.with_variants([first.variants[0],
                             Variant('jpeg', 90, bad_variant, 100.0)]),
        second,
    )
    counter = KeyCounter()
    rows = compute_targets(
        manifest.with_frames(frames),
        {'detector': FlakyDetector([bad_variant, second.source])},
        counter=counter
    )

    assert {r['frame_id'] for r in rows} == {first.frame_id}
    assert {r['qf'] for r in rows} == {30}
    assert counter.as_dict() == {'backend_failure': 1, 'frame_failure': 1}
    log = captured_log.getvalue()
    assert 'variant skipped' in log and 'frame skipped' in log


class FlakyRecognizer(SyntheticRecognizer):
    """
    Fails on blank crops, as a recognizer without a plate in view may.
    """
    def recognize_plate(self, image):
        pixels = image.load()
        if pixels.min() == pixels.max():
            raise RuntimeError('no text line found')
        return super(FlakyRecognizer, self).recognize_plate(image)


def test_recognizer_failures_drop_only_their_variant(captured_log):
    manifest = unchanged_manifest('plate', count=1)
    frame = manifest.frames[0]
    blank = ImageRef.from_array(np.full_like(frame.source.load(), 128))
    frames = (frame.with_variants([frame.variants[0],
                                   Variant('jpeg', 90, blank, 10.0)]),)
    counter = KeyCounter()
    rows = compute_targets(
        manifest.with_frames(frames),
        {'detector': SyntheticDetector('plate'),
         'recognizer': FlakyRecognizer()},
        counter=counter
    )

    assert {r['qf'] for r in rows} == {30}
    assert values(rows, 'jaro') == [1.0] * len(frame.plate_strings)
    assert counter['backend_failure'] == 1
    assert 'frame_failure' not in counter.as_dict()
    assert 'variant skipped' in captured_log.getvalue()


@pytest.mark.parametrize('task, backends', [
    ('object', {}),
    ('object', {'detector': None}),
    ('plate', {'detector': SyntheticDetector('plate')}),
    ('face_recognition', {'detector': SyntheticDetector('face')}),
])
def test_missing_backend(task, backends):
    manifest = Manifest(task, (), seed=0)
    with pytest.raises(BackendError):
        compute_targets(manifest, backends)


def test_required_roles():
    assert required_roles('plate') == ('detector', 'recognizer')
    assert required_roles('face_recognition') == ('embedder',)
    assert required_roles('face') == ('detector',)


def test_targets_file(tmp_path):
    rows = compute_targets(face_manifest(2), {'embedder': MeanEmbedder()})
    path = str(tmp_path / 'targets' / 'targets.csv')
    write_targets(path, rows)
    assert read_targets(path) == rows
    with open(path, encoding='utf-8') as f:
        assert f.readline().strip() == \
            'frame_id,object_id,codec,qf,target_name,value'
