import math

import numpy as np
import pytest

from mvqa.core.types import BoundingBox, Detection, ImageRef
from mvqa.dataset.manifest import LabeledFrame, Manifest, Variant
from mvqa.evaluation.harness import (
    CorrelationReport, EvaluationItem, collect_items, evaluate_metric
)
from mvqa.metrics.support import MetricPlugin
from mvqa.metrics.target import TargetMetric
from mvqa.training.targets import FRAME_LEVEL


def items(targets, codecs=('jpeg',)):
    pixels = np.zeros((4, 4), dtype=np.uint8)
    return [
        EvaluationItem('f{:04d}'.format(i), 0, codecs[i % len(codecs)],
                       10 * (i % 9 + 1), pixels, pixels, float(t))
        for i, t in enumerate(targets)
    ]


class NoiseMetric(MetricPlugin):
    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)

    @classmethod
    def name(cls):
        return 'noise'

    def higher_is_better(self):
        return True

    def score(self, item):
        return float(self.rng.normal())


class ScriptedMetric(MetricPlugin):
    def __init__(self, scores, higher_is_better=True):
        self.scores = list(scores)
        self._higher = higher_is_better

    @classmethod
    def name(cls):
        return 'scripted'

    def higher_is_better(self):
        return self._higher

    def score(self, item):
        return self.scores.pop(0)


class TestEvaluateMetric(object):
    @pytest.mark.parametrize('target', ['delta_object_iou', 'object_iou',
                                        'face_delta', 'jaro'])
    def test_target_metric_is_perfect(self, target):
        values = np.random.default_rng(0).uniform(size=50)
        report = evaluate_metric(TargetMetric(target), items(values),
                                 'object', target)
        assert report.srcc == pytest.approx(1.0)
        assert report.plcc == pytest.approx(1.0)
        assert report.n == 50

    def test_noise_is_uncorrelated(self):
        values = np.random.default_rng(1).uniform(size=1000)
        report = evaluate_metric(NoiseMetric(2), items(values), 'object',
                                 'object_iou')
        assert abs(report.srcc) < 0.1

    def test_orientation(self):
        # A lower-is-better metric which grows with a lower-is-better target
        # is a good metric.
        values = [0.1, 0.2, 0.3, 0.4]
        metric = ScriptedMetric([1.0, 2.0, 3.0, 4.0], higher_is_better=False)
        report = evaluate_metric(metric, items(values), 'object',
                                 'delta_object_iou')
        assert report.srcc == pytest.approx(1.0)
        # The same metric against a higher-is-better target is a bad one.
        metric = ScriptedMetric([1.0, 2.0, 3.0, 4.0], higher_is_better=False)
        report = evaluate_metric(metric, items(values), 'object',
                                 'object_iou')
        assert report.srcc == pytest.approx(-1.0)

    def test_too_few_items(self, captured_log):
        report = evaluate_metric(TargetMetric('jaro'), items([0.1, 0.2]),
                                 'plate', 'jaro')
        assert report.n == 2 and report.srcc is None and report.plcc is None
        assert not report.defined
        assert 'too few items' in captured_log.getvalue()

    def test_non_finite_scores_are_dropped(self, captured_log):
        metric = ScriptedMetric([1.0, math.nan, 3.0, math.inf, 5.0, 6.0])
        report = evaluate_metric(metric, items([1, 2, 3, 4, 5, 6]),
                                 'object', 'object_iou')
        assert report.n == 4
        assert report.srcc == pytest.approx(1.0)
        assert [row[0] for row in report.series] == ['f0000', 'f0002',
                                                     'f0004', 'f0005']
        assert captured_log.getvalue().count('non-finite metric score') == 2

    def test_codec_breakdown(self):
        values = list(range(8))
        report = evaluate_metric(TargetMetric('object_iou'),
                                 items(values, ('jpeg', 'x264', 'x264',
                                                'x264')),
                                 'object', 'object_iou')
        assert sorted(report.codec_srcc) == ['jpeg', 'x264']
        assert report.codec_srcc['jpeg'] is None
        assert report.codec_srcc['x264'] == pytest.approx(1.0)

    def test_report_dict(self):
        report = evaluate_metric(TargetMetric('jaro'), items([0.1, 0.5, 0.2]),
                                 'plate', 'jaro')
        data = report.as_dict()
        assert data['metric'] == 'target' and data['task'] == 'plate'
        assert len(data['series']) == 3
        assert 'series' not in report.as_dict(with_series=False)
        again = CorrelationReport.from_dict(data)
        assert again.as_dict() == data


def frame(frame_id, split='val'):
    reference = (np.arange(20 * 30) % 256).astype(np.uint8).reshape(20, 30)
    variants = tuple(
        Variant('jpeg', qf, ImageRef.from_array(reference // (k + 2)), 30.0)
        for k, qf in enumerate((30, 90))
    )
    return LabeledFrame(
        frame_id, ImageRef.from_array(reference),
        (Detection(BoundingBox(2, 2, 10, 12)),
         Detection(BoundingBox(15, 5, 25, 15))),
        variants=variants, split=split
    )


def rows_of(frame_id):
    res = []
    for qf in (30, 90):
        for obj in (0, 1):
            res.append({'frame_id': frame_id, 'object_id': obj,
                        'codec': 'jpeg', 'qf': qf,
                        'target_name': 'object_iou',
                        'value': qf / 100.0 + obj / 10.0})
        res.append({'frame_id': frame_id, 'object_id': FRAME_LEVEL,
                    'codec': 'jpeg', 'qf': qf, 'target_name': 'mean_iou',
                    'value': qf / 200.0})
    return res


class TestCollectItems(object):
    def manifest(self):
        return Manifest('object', (frame('b'), frame('a', 'train')), seed=0)

    def rows(self):
        return rows_of('a') + rows_of('b')

    def test_object_pooling(self):
        found = collect_items(self.manifest(), self.rows(), 'object_iou',
                              padding=0.0)
        assert [(i.frame_id, i.object_id, i.qf) for i in found] == [
            ('a', 0, 30), ('a', 0, 90), ('a', 1, 30), ('a', 1, 90),
            ('b', 0, 30), ('b', 0, 90), ('b', 1, 30), ('b', 1, 90),
        ]
        first = found[0]
        assert first.reference.shape == (10, 8)
        assert first.distorted.shape == first.reference.shape
        assert first.target == pytest.approx(0.3)

    def test_image_pooling(self):
        found = collect_items(self.manifest(), self.rows(), 'object_iou',
                              pooling='image')
        assert [(i.frame_id, i.object_id, i.qf) for i in found] == [
            ('a', FRAME_LEVEL, 30), ('a', FRAME_LEVEL, 90),
            ('b', FRAME_LEVEL, 30), ('b', FRAME_LEVEL, 90),
        ]
        assert found[0].target == pytest.approx(0.35)
        assert found[0].reference.shape == (20, 30)

    def test_frame_targets(self):
        found = collect_items(self.manifest(), self.rows(), 'mean_iou',
                              pooling='object')
        assert [i.object_id for i in found] == [FRAME_LEVEL] * 4
        assert [i.target for i in found] == [0.15, 0.45, 0.15, 0.45]

    def test_splits(self):
        found = collect_items(self.manifest(), self.rows(), 'object_iou',
                              splits=('val', 'test'))
        assert {i.frame_id for i in found} == {'b'}

    def test_missing_rows_and_variants(self):
        rows = [r for r in self.rows() if r['qf'] != 90] + [{
            'frame_id': 'b', 'object_id': 0, 'codec': 'x264', 'qf': 31,
            'target_name': 'object_iou', 'value': 0.5,
        }]
        found = collect_items(self.manifest(), rows, 'object_iou')
        assert {(i.codec, i.qf) for i in found} == {('jpeg', 30)}

    def test_invalid_pooling(self):
        with pytest.raises(ValueError):
            collect_items(self.manifest(), self.rows(), 'object_iou',
                          pooling='video')
