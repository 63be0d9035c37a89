"""
Ground truth degradation targets of a manifest, computed with the
machine-vision backends on the reference and on every compressed variant.
"""

import csv
from dataclasses import dataclass
from functools import partial

from mvqa.core.errors import BackendError, InvalidEmbeddingError
from mvqa.core.images import as_array, crop
from mvqa.core.types import ImageRef
from mvqa.core.utils import KeyCounter
from mvqa.dataset.labeling import confident, snapped_window
from mvqa.targets.detection import (
    DEFAULT_MATCH_THRESHOLD, match_detections, mean_iou, per_object_targets
)
from mvqa.targets.kinds import DETECTION_TASKS
from mvqa.targets.recognition import (
    FacePairRecord, PlateTargetRecord, embed_checked, plate_frame_score
)
from mvqa.tools import logger
from mvqa.tools.files import write_csv
from mvqa.tools.parallel_tools import effective_jobs, parallel_map

# object_id of the rows which hold one value per frame
FRAME_LEVEL = -1

TARGET_COLUMNS = ('frame_id', 'object_id', 'codec', 'qf', 'target_name',
                  'value')

DEFAULT_MIN_CONFIDENCE = 0.25


@dataclass(frozen=True)
class TargetSettings(object):
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    class_aware: bool = True
    min_confidence: float = DEFAULT_MIN_CONFIDENCE


def _row(frame_id, object_id, codec, qf, name, value):
    return {'frame_id': frame_id, 'object_id': object_id, 'codec': codec,
            'qf': qf, 'target_name': name, 'value': float(value)}


def _row_key(row):
    return (row['target_name'], row['frame_id'], row['object_id'],
            row['codec'], row['qf'])


def _detect(detector, image, settings):
    try:
        return confident(detector.detect(image), settings.min_confidence)
    except BackendError:
        raise
    except Exception as e:
        raise BackendError('detector {} failed: {}'.format(
            detector.name(), e
        )) from e


def _read_plate(recognizer, pixels, box):
    height, width = pixels.shape[:2]
    window, _ = snapped_window(box, width, height)
    try:
        return recognizer.recognize_plate(
            ImageRef.from_array(crop(pixels, window))
        )
    except Exception as e:
        raise BackendError('recognizer {} failed: {}'.format(
            recognizer.name(), e
        )) from e


def _detection_rows(frame, backends, settings, task, counter):
    gt = list(frame.detections)
    detector = backends['detector']
    ref_det = _detect(detector, frame.source, settings)

    rows = []
    for v in frame.variants:
        try:
            rows.extend(_variant_rows(frame, v, gt, ref_det, backends,
                                      settings, task, counter))
        except BackendError as e:
            counter.incr('backend_failure')
            logger.log('warning', 'variant skipped', frame_id=frame.frame_id,
                       codec=v.codec, qf=v.qf, error=e)
    return rows


def _variant_rows(frame, v, gt, ref_det, backends, settings, task, counter):
    det = _detect(backends['detector'], v.image, settings)
    rows = []
    for r in per_object_targets(frame.frame_id, gt, ref_det, det, v.codec,
                                v.qf, settings.match_threshold,
                                settings.class_aware):
        rows.append(_row(r.frame_id, r.object_id, r.codec, r.qf,
                         'delta_object_iou', r.delta))
        rows.append(_row(r.frame_id, r.object_id, r.codec, r.qf,
                         'object_iou', r.compressed_iou))
    m = mean_iou(gt, det, settings.match_threshold, settings.class_aware)
    if m is not None:
        rows.append(_row(frame.frame_id, FRAME_LEVEL, v.codec, v.qf,
                         'mean_iou', m))

    if task == 'plate':
        rows.extend(_plate_rows(frame, v, det, backends['recognizer'],
                                settings, counter))
    return rows


def _plate_rows(frame, variant, det, recognizer, settings, counter):
    pixels = as_array(variant.image)
    gt = list(frame.detections)
    rows = []
    for i, (g, truth) in enumerate(zip(gt, frame.plate_strings)):
        record = PlateTargetRecord.create(
            frame.frame_id, i, truth, _read_plate(recognizer, pixels, g.box)
        )
        rows.append(_row(frame.frame_id, record.plate_id, variant.codec,
                         variant.qf, 'jaro', record.jaro))

    match = match_detections(gt, det, settings.match_threshold,
                             settings.class_aware)
    matched = [
        (frame.plate_strings[g], _read_plate(recognizer, pixels, det[d].box))
        for g, d, _ in match.pairs if g < len(frame.plate_strings)
    ]
    score = plate_frame_score(matched)
    if score is None:
        counter.incr('no_matched_plate')
    else:
        rows.append(_row(frame.frame_id, FRAME_LEVEL, variant.codec,
                         variant.qf, 'jaro_frame', score))
    return rows


def _face_rows(frame, backends, counter):
    embedder = backends['embedder']
    if frame.database is None:
        raise ValueError('frame {} has no database image'.format(
            frame.frame_id
        ))
    database = embed_checked(embedder, frame.database)
    ref = embed_checked(embedder, frame.source)

    rows = []
    for v in frame.variants:
        try:
            compr = embed_checked(embedder, v.image)
        except (BackendError, InvalidEmbeddingError) as e:
            counter.incr('backend_failure')
            logger.log('warning', 'variant skipped', frame_id=frame.frame_id,
                       codec=v.codec, qf=v.qf, error=e)
            continue
        record = FacePairRecord.from_embeddings(
            frame.person_id, frame.database, frame.source, v.image, ref,
            compr, database
        )
        rows.append(_row(frame.frame_id, 0, v.codec, v.qf, 'face_delta',
                         record.f_delta))
    return rows


def frame_targets(frame, task, backends, settings):
    """
    Computes the target rows of one frame. A failure on the reference side
    drops the whole frame; a failure on a variant drops that variant.

    :param LabeledFrame frame: The frame.
    :param str task: The manifest's task.
    :param dict backends: Backends by role.
    :param TargetSettings settings: The matching settings.
    :rtype: (list[dict], dict[str, int])
    """
    counter = KeyCounter()
    try:
        if task in DETECTION_TASKS:
            rows = _detection_rows(frame, backends, settings, task, counter)
        elif task == 'face_recognition':
            rows = _face_rows(frame, backends, counter)
        else:
            raise ValueError('no targets for task {!r}'.format(task))
    except (BackendError, InvalidEmbeddingError) as e:
        counter.incr('frame_failure')
        logger.log('warning', 'frame skipped', frame_id=frame.frame_id,
                   error=e)
        rows = []
    return rows, counter.as_dict()


def required_roles(task):
    """
    :param str task: A task tag.
    :rtype: tuple[str]
    """
    if task == 'plate':
        return 'detector', 'recognizer'
    if task == 'face_recognition':
        return 'embedder',
    return 'detector',


def compute_targets(manifest, backends, settings=None, jobs=1,
                    counter=None):
    """
    Computes every target row of a manifest, sorted by target name, frame,
    object, codec and quality.

    :param Manifest manifest: The manifest.
    :param dict backends: Backends by role (detector, embedder, recognizer).
    :param TargetSettings | None settings: The matching settings.
    :param int jobs: The number of worker processes (0: one per CPU).
    :param KeyCounter | None counter: Receives the failure counts.
    :rtype: list[dict]
    :raise BackendError: if a backend required by the task is missing.
    """
    settings = settings or TargetSettings()
    counter = counter if counter is not None else KeyCounter()
    for role in required_roles(manifest.task):
        if backends.get(role) is None:
            raise BackendError('task {} needs a {} backend'.format(
                manifest.task, role
            ))

    process_count = effective_jobs(jobs)
    if not all(b.parallel_safe() for b in backends.values() if b is not None):
        process_count = 1

    results = parallel_map(
        process_count,
        partial(frame_targets, task=manifest.task, backends=backends,
                settings=settings),
        manifest.frames,
        timeout_callback=lambda cause: logger.log(
            'warning', 'target computation timed out', cause=cause
        )
    )

    rows = []
    for frame, res in zip(manifest.frames, results):
        if res is None:
            counter.incr('frame_failure')
            logger.log('error', 'worker failed', frame_id=frame.frame_id)
            continue
        frame_rows, counts = res
        rows.extend(frame_rows)
        for key, count in counts.items():
            counter.incr(key, count)

    return sorted(rows, key=_row_key)


def write_targets(path, rows):
    write_csv(path, TARGET_COLUMNS, [
        [r['frame_id'], r['object_id'], r['codec'], r['qf'],
         r['target_name'], repr(float(r['value']))]
        for r in rows
    ])


def read_targets(path):
    """
    :param str path: A targets CSV file.
    :rtype: list[dict]
    """
    with open(path, encoding='utf-8', newline='') as f:
        return [
            _row(r['frame_id'], int(r['object_id']), r['codec'], int(r['qf']),
                 r['target_name'], float(r['value']))
            for r in csv.DictReader(f)
        ]
