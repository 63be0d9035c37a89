"""
Detection degradation targets: ground truth/detection matching, mean-IoU,
Object IoU and Delta Object IoU.
"""

from dataclasses import dataclass
from typing import Tuple

from mvqa.core.similarity import iou
from mvqa.core.utils import mean_or_none

DEFAULT_MATCH_THRESHOLD = 0.5


@dataclass(frozen=True)
class MatchResult(object):
    """
    A partial injective mapping between ground truth and detections.
    `pairs` is in the order the greedy matcher selected them.
    """
    pairs: Tuple[Tuple[int, int, float], ...]
    unmatched_gt: Tuple[int, ...]
    unmatched_det: Tuple[int, ...]

    def iou_of_gt(self, gt_index):
        """
        :param int gt_index: A ground truth index.
        :rtype: float
        """
        for g, _, value in self.pairs:
            if g == gt_index:
                return value
        return 0.0

    def matched_sum(self):
        return sum(value for _, _, value in self.pairs)


@dataclass(frozen=True)
class ObjectTargetRecord(object):
    frame_id: str
    object_id: int
    ref_iou: float
    compressed_iou: float
    delta: float
    codec: str
    qf: int

    @staticmethod
    def create(frame_id, object_id, ref_iou, compressed_iou, codec, qf):
        return ObjectTargetRecord(
            frame_id, object_id, ref_iou, compressed_iou,
            delta_object_iou(ref_iou, compressed_iou), codec, qf
        )


def _check_threshold(threshold):
    if not (0.0 < threshold < 1.0):
        raise ValueError(
            'match threshold must be in (0, 1), got {}'.format(threshold)
        )


def match_detections(gt, det, threshold=DEFAULT_MATCH_THRESHOLD,
                     class_aware=True):
    """
    Matches detections to ground truth objects greedily, by descending IoU.
    Ties are broken by the lower ground truth index, then the lower detection
    index. Pairs whose IoU is below the threshold are never matched.

    :param list[Detection] gt: The ground truth objects.
    :param list[Detection] det: The detections.
    :param float threshold: The minimal IoU of a match, in (0, 1).
    :param bool class_aware: Whether only equal class ids may match.
    :rtype: MatchResult
    """
    _check_threshold(threshold)

    candidates = [
        (iou(g.box, d.box), gi, di)
        for gi, g in enumerate(gt)
        for di, d in enumerate(det)
        if not class_aware or g.class_id == d.class_id
    ]
    candidates = [c for c in candidates if c[0] >= threshold]
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

    used_gt, used_det = set(), set()
    pairs = []
    for value, gi, di in candidates:
        if gi in used_gt or di in used_det:
            continue
        used_gt.add(gi)
        used_det.add(di)
        pairs.append((gi, di, value))

    return MatchResult(
        tuple(pairs),
        tuple(i for i in range(len(gt)) if i not in used_gt),
        tuple(i for i in range(len(det)) if i not in used_det)
    )


def frame_object_ious(gt, det, threshold=DEFAULT_MATCH_THRESHOLD,
                      class_aware=True):
    """
    Returns the Object IoU of every ground truth object of a frame, from a
    single matching of the frame. Unmatched objects get 0.

    :rtype: list[float]
    """
    match = match_detections(gt, det, threshold, class_aware)
    return [match.iou_of_gt(i) for i in range(len(gt))]


def mean_iou(frame_gt, frame_det, threshold=DEFAULT_MATCH_THRESHOLD,
             class_aware=True):
    """
    Returns the average matched IoU over the ground truth objects of a frame,
    missed objects contributing 0. Returns None for a frame without ground
    truth, which must then be left out of aggregates.

    :rtype: float | None
    """
    return mean_or_none(
        frame_object_ious(frame_gt, frame_det, threshold, class_aware)
    )


def object_iou(gt_object, det, threshold=DEFAULT_MATCH_THRESHOLD,
               class_aware=True):
    """
    Returns the IoU of the detection matched to a single ground truth object,
    or 0 if none matches.

    :param Detection gt_object: The object.
    :param list[Detection] det: The detections of its frame.
    :rtype: float
    """
    return match_detections([gt_object], det, threshold,
                            class_aware).iou_of_gt(0)


def delta_object_iou(ref_iou, compressed_iou):
    """
    Returns how much IoU an object lost to compression. Negative when
    compression happened to help.

    :param float ref_iou: The Object IoU on the reference frame.
    :param float compressed_iou: The Object IoU on the compressed frame.
    :rtype: float
    """
    for v in (ref_iou, compressed_iou):
        if not (0.0 <= v <= 1.0):
            raise ValueError('IoU out of [0, 1]: {}'.format(v))
    return ref_iou - compressed_iou


def per_object_targets(frame_id, gt, ref_det, variant_det, codec, qf,
                       threshold=DEFAULT_MATCH_THRESHOLD, class_aware=True):
    """
    Builds the Object IoU records of every object of a frame for one
    compressed variant.

    :rtype: list[ObjectTargetRecord]
    """
    ref = frame_object_ious(gt, ref_det, threshold, class_aware)
    compressed = frame_object_ious(gt, variant_det, threshold, class_aware)
    return [
        ObjectTargetRecord.create(frame_id, i, r, c, codec, qf)
        for i, (r, c) in enumerate(zip(ref, compressed))
    ]
