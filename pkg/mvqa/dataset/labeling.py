"""
Ground truth construction: auto-labeling by a trusted detector, plate
deduplication, face pair selection and object crop extraction.
"""

import math
import os
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from mvqa.core.images import as_array, crop
from mvqa.core.types import ImageRef
from mvqa.core.utils import KeyCounter, stable_seed
from mvqa.dataset.manifest import LabeledFrame
from mvqa.targets.recognition import levenshtein
from mvqa.tools import logger

DEFAULT_CONF_THRESHOLD = 0.7
DEFAULT_MIN_GAP = 1
DEFAULT_DEDUP_DISTANCE = 1
DEFAULT_PADDING = 0.1

# Snapping tolerance: boxes computed in floating point that land within this
# distance of a pixel edge snap to it.
_SNAP_EPS = 1e-9


@dataclass(frozen=True)
class FacePair(object):
    person_id: str
    database: ImageRef
    query: ImageRef


@dataclass(frozen=True)
class ObjectCrops(object):
    """
    The crops of one object: the reference crop and one crop per variant,
    all cut with the same window.
    """
    object_id: int
    window: Tuple[int, int, int, int]
    reference: np.ndarray
    variants: Tuple[Tuple[str, int, np.ndarray], ...]


def frame_id_of(index, image):
    if image.path is not None:
        return os.path.splitext(os.path.basename(image.path))[0]
    return 'frame{:06d}'.format(index)


def autolabel_frames(frames, backend, conf_threshold=DEFAULT_CONF_THRESHOLD,
                     min_gap=DEFAULT_MIN_GAP, counter=None):
    """
    Labels a sequence of frames with the detections of a trusted detector.
    Only detections at or above the confidence threshold are kept, and only
    frames with at least one of them. Kept frames are at least min_gap
    frames apart: the first eligible frame is kept, and frames too close to
    the last kept one are skipped without being run through the detector.

    :param list[ImageRef] frames: The frames, in temporal order.
    :param DetectorBackend backend: The trusted detector.
    :param float conf_threshold: The minimal detection confidence.
    :param int min_gap: The minimal index difference between kept frames.
    :param KeyCounter | None counter: Receives the skip reasons.
    :rtype: list[LabeledFrame]
    """
    if min_gap < 1:
        raise ValueError('min_gap must be >= 1, got {}'.format(min_gap))
    counter = counter if counter is not None else KeyCounter()

    labeled = []
    last_kept = None
    for index, image in enumerate(frames):
        if last_kept is not None and index - last_kept < min_gap:
            counter.incr('within_gap')
            continue

        kept_dets = tuple(
            d for d in backend.detect(image) if d.confidence >= conf_threshold
        )
        if len(kept_dets) == 0:
            counter.incr('no_confident_detection')
            continue

        labeled.append(LabeledFrame(frame_id_of(index, image), image,
                                    kept_dets))
        last_kept = index

    logger.log('info', 'auto-labeled frames', kept=len(labeled),
               total=len(frames), **dict(counter.items()))
    return labeled


def snapped_window(box, width, height, padding_fraction=0.0):
    """
    Returns the whole-pixel window around a box grown by the given fraction
    of its size on each side, snapped outward and clipped to the image.

    :param BoundingBox box: The box.
    :param int width: The image width.
    :param int height: The image height.
    :param float padding_fraction: The padding, >= 0.
    :rtype: ((int, int, int, int), bool)
    :return: The window and whether clipping happened.
    """
    if padding_fraction < 0:
        raise ValueError('negative padding: {}'.format(padding_fraction))
    dx, dy = box.width * padding_fraction, box.height * padding_fraction
    x0 = int(math.floor(box.x_min - dx + _SNAP_EPS))
    y0 = int(math.floor(box.y_min - dy + _SNAP_EPS))
    x1 = int(math.ceil(box.x_max + dx - _SNAP_EPS))
    y1 = int(math.ceil(box.y_max + dy - _SNAP_EPS))
    window = (max(0, x0), max(0, y0), min(width, x1), min(height, y1))
    return window, window != (x0, y0, x1, y1)


def _crop_image(image, window):
    return ImageRef.from_array(crop(as_array(image), window))


def dedup_plate_frames(frames, recognizer,
                       max_similarity_distance=DEFAULT_DEDUP_DISTANCE,
                       counter=None):
    """
    Keeps the frames whose plates are all read with full confidence and all
    differ by more than the given edit distance from every plate kept
    before. The strings read become the ground truth strings.

    :param list[LabeledFrame] frames: Frames with plate detections.
    :param PlateRecognizer recognizer: The trusted recognizer.
    :param int max_similarity_distance: Plates at this edit distance or less
        from a kept plate are duplicates.
    :param KeyCounter | None counter: Receives the skip reasons.
    :rtype: list[LabeledFrame]
    """
    counter = counter if counter is not None else KeyCounter()
    kept_strings = []
    kept = []

    for frame in frames:
        if len(frame.detections) == 0:
            counter.incr('no_plate')
            continue

        image = frame.source.load()
        height, width = image.shape[:2]
        strings = []
        for det in frame.detections:
            window, _ = snapped_window(det.box, width, height)
            strings.append(recognizer.recognize_plate(
                _crop_image(image, window)
            ))

        if not all(s.confidence == 1.0 and len(s) > 0 for s in strings):
            counter.incr('not_fully_recognized')
            continue
        if any(levenshtein(s, k) <= max_similarity_distance
               for s in strings for k in kept_strings):
            counter.incr('duplicate_plate')
            continue

        kept_strings.extend(strings)
        kept.append(LabeledFrame(frame.frame_id, frame.source,
                                 frame.detections, tuple(strings),
                                 person_id=frame.person_id))

    logger.log('info', 'deduplicated plate frames', kept=len(kept),
               total=len(frames), **dict(counter.items()))
    return kept


def _face_score(detector, image):
    return max((d.confidence for d in detector.detect(image)), default=0.0)


def select_face_pairs(person_images, detector, seed, counter=None):
    """
    Picks a database and a query image per person. The database image is the
    one in which the detector is most confident of a face (ties go to the
    lower path); the query is drawn among the others with a generator
    seeded by the run seed and the person id.

    :param dict[str, list[ImageRef]] person_images: Images per person id.
    :param DetectorBackend detector: A face detector.
    :param int seed: The run seed.
    :param KeyCounter | None counter: Counts skipped persons.
    :rtype: list[FacePair]
    """
    counter = counter if counter is not None else KeyCounter()
    pairs = []

    for person_id in sorted(person_images):
        images = sorted(person_images[person_id], key=lambda i: i.path or '')
        if len(images) < 2:
            counter.incr('too_few_images')
            logger.log('warning', 'person skipped', person_id=person_id,
                       images=len(images))
            continue

        scored = sorted(
            ((_face_score(detector, img), img) for img in images),
            key=lambda p: (-p[0], p[1].path or '')
        )
        database = scored[0][1]
        others = [img for img in images if img is not database]
        rng = np.random.default_rng(stable_seed('query', seed, person_id))
        query = others[int(rng.integers(0, len(others)))]
        pairs.append(FacePair(person_id, database, query))

    return pairs


def extract_crops(frame, padding_fraction=DEFAULT_PADDING):
    """
    Cuts every ground truth object out of the reference image and out of
    every compressed variant, with the same window for all.

    :param LabeledFrame frame: The frame.
    :param float padding_fraction: The padding around each box, as a
        fraction of its size.
    :rtype: list[ObjectCrops]
    """
    reference = frame.source.load()
    height, width = reference.shape[:2]
    variants = [(v.codec, v.qf, v.image.load()) for v in frame.variants]

    res = []
    for object_id, det in enumerate(frame.detections):
        window, clipped = snapped_window(det.box, width, height,
                                         padding_fraction)
        if clipped:
            logger.log('debug', 'crop window clipped to the image',
                       frame_id=frame.frame_id, object_id=object_id,
                       window=window)
        res.append(ObjectCrops(
            object_id, window, crop(reference, window),
            tuple((codec, qf, crop(pixels, window))
                  for codec, qf, pixels in variants)
        ))
    return res


def confident(detections, threshold):
    """
    :param list[Detection] detections: Detections.
    :param float threshold: The minimal confidence.
    :rtype: list[Detection]
    """
    return [d for d in detections if d.confidence >= threshold]

