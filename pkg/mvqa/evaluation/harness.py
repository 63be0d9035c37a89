"""
Evaluation of quality metrics against machine-vision targets. Both the
metric scores and the targets are turned into "higher is better" series
before they are correlated, so a good metric always has a positive SRCC.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mvqa.core.utils import StopWatch
from mvqa.dataset.labeling import DEFAULT_PADDING, extract_crops
from mvqa.evaluation.correlation import MIN_LENGTH, plcc, srcc
from mvqa.targets.kinds import kind_by_name
from mvqa.tools import logger
from mvqa.training.targets import FRAME_LEVEL

POOLINGS = ('object', 'image')


@dataclass(frozen=True)
class EvaluationItem(object):
    frame_id: str
    object_id: int
    codec: str
    qf: int
    reference: np.ndarray = field(repr=False, compare=False)
    distorted: np.ndarray = field(repr=False, compare=False)
    target: float


@dataclass(frozen=True)
class CorrelationReport(object):
    metric: str
    task: str
    target: str
    n: int
    srcc: Optional[float]
    plcc: Optional[float]
    codec_srcc: dict
    series: list = field(repr=False)
    seconds_per_item: Optional[float] = None

    @property
    def defined(self):
        return self.srcc is not None

    def as_dict(self, with_series=True):
        res = {
            'metric': self.metric, 'task': self.task, 'target': self.target,
            'n': self.n, 'srcc': self.srcc, 'plcc': self.plcc,
            'codec_srcc': dict(sorted(self.codec_srcc.items())),
        }
        if with_series:
            res['series'] = self.series
        return res

    @staticmethod
    def from_dict(data, seconds_per_item=None):
        """
        :param dict data: A dictionary written by `as_dict`.
        :rtype: CorrelationReport
        """
        return CorrelationReport(
            data['metric'], data['task'], data['target'], int(data['n']),
            data['srcc'], data['plcc'], dict(data['codec_srcc']),
            data.get('series', []), seconds_per_item
        )


def _frame_items(frame, rows):
    reference = frame.source.load()
    res = []
    for (codec, qf), values in sorted(rows.items()):
        variant = frame.variant(codec, qf)
        if variant is None:
            continue
        res.append(EvaluationItem(
            frame.frame_id, FRAME_LEVEL, codec, qf, reference,
            variant.image.load(), float(np.mean(values))
        ))
    return res


def _object_items(frame, rows, padding):
    res = []
    for c in extract_crops(frame, padding):
        for codec, qf, pixels in c.variants:
            value = rows.get((c.object_id, codec, qf))
            if value is not None:
                res.append(EvaluationItem(frame.frame_id, c.object_id, codec,
                                          qf, c.reference, pixels, value))
    return res


def collect_items(manifest, rows, target, pooling='object',
                  padding=DEFAULT_PADDING, splits=None):
    """
    Pairs the target rows of a manifest with the pixels they were computed
    on.

    With `object` pooling, per-object targets give one item per object and
    variant, on crops cut with the given padding. With `image` pooling, the
    per-object values of a variant are averaged and the item is the whole
    frame. Per-frame targets always give frame items.

    :param Manifest manifest: The manifest.
    :param list[dict] rows: Its target rows.
    :param str target: The target name.
    :param str pooling: object or image.
    :param float padding: The crop padding, as a fraction of the box size.
    :param tuple[str] | None splits: The splits to evaluate on, None for
        every frame.
    :rtype: list[EvaluationItem]
    """
    if pooling not in POOLINGS:
        raise ValueError('pooling must be one of {}, got {!r}'.format(
            ', '.join(POOLINGS), pooling
        ))
    frame_level = kind_by_name(target).per_frame() or pooling == 'image'

    by_frame = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r['target_name'] != target:
            continue
        if frame_level:
            by_frame[r['frame_id']][(r['codec'], r['qf'])].append(r['value'])
        else:
            by_frame[r['frame_id']][(r['object_id'], r['codec'], r['qf'])] = \
                r['value']

    items = []
    for frame in sorted(manifest.frames, key=lambda f: f.frame_id):
        if splits is not None and frame.split not in splits:
            continue
        frame_rows = by_frame.get(frame.frame_id)
        if not frame_rows:
            continue
        if frame_level:
            items.extend(_frame_items(frame, frame_rows))
        else:
            items.extend(_object_items(frame, frame_rows, padding))
    return items


def _oriented(values, higher_is_better):
    return [v if higher_is_better else -v for v in values]


def _correlate(scores, targets):
    if len(scores) < MIN_LENGTH:
        return None, None
    return srcc(scores, targets), plcc(scores, targets)


def evaluate_metric(plugin, items, task, target):
    """
    Scores every item with a metric and correlates the scores with the
    targets, pooled and per codec.

    :param MetricPlugin plugin: The metric.
    :param list[EvaluationItem] items: The items.
    :param str task: The task tag, for the report.
    :param str target: The target name of the items.
    :rtype: CorrelationReport
    """
    watch = StopWatch()
    name = plugin.display_name()
    scored = []
    for item in items:
        with watch.measure('score'):
            score = float(plugin.score(item))
        if math.isfinite(score):
            scored.append((item, score))
        else:
            logger.log('warning', 'non-finite metric score dropped',
                       metric=name, frame_id=item.frame_id,
                       object_id=item.object_id, codec=item.codec,
                       qf=item.qf)

    target_up = kind_by_name(target).higher_is_better()
    metric_up = plugin.higher_is_better()

    def series(pairs):
        return (_oriented([s for _, s in pairs], metric_up),
                _oriented([i.target for i, _ in pairs], target_up))

    pooled_srcc, pooled_plcc = _correlate(*series(scored))
    if pooled_srcc is None and len(scored) < MIN_LENGTH:
        logger.log('warning', 'too few items for a correlation',
                   metric=name, task=task, n=len(scored))

    by_codec = defaultdict(list)
    for pair in scored:
        by_codec[pair[0].codec].append(pair)
    codec_srcc = {
        codec: _correlate(*series(pairs))[0]
        for codec, pairs in sorted(by_codec.items())
    }

    report = CorrelationReport(
        name, task, target, len(scored), pooled_srcc, pooled_plcc,
        codec_srcc,
        [[i.frame_id, i.object_id, i.codec, i.qf, s, i.target]
         for i, s in scored],
        watch.per_call('score')
    )
    logger.log('info', 'metric evaluated', metric=name, task=task,
               target=target, n=report.n, srcc=report.srcc)
    return report
