"""
Labeled frames, the manifest that lists them, and its JSON Lines format.

A manifest file holds one frame record per line. Paths are stored relative
to the directory of the manifest so that a run directory can be moved.
"""

import os
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from mvqa.core.errors import SchemaVersionError
from mvqa.core.types import BoundingBox, Detection, ImageRef, PlateString
from mvqa.tools.files import read_jsonl, write_jsonl

SCHEMA_VERSION = 1

SPLITS = ('train', 'val', 'test')


@dataclass(frozen=True)
class Variant(object):
    codec: str
    qf: int
    image: ImageRef
    psnr_db: float


@dataclass(frozen=True)
class LabeledFrame(object):
    """
    A source image with its ground truth and compressed variants. For the
    face_recognition task the source is the query image and `database` the
    database image of the same person.
    """
    frame_id: str
    source: ImageRef
    detections: Tuple[Detection, ...] = ()
    plate_strings: Tuple[PlateString, ...] = ()
    variants: Tuple[Variant, ...] = ()
    person_id: Optional[str] = None
    database: Optional[ImageRef] = None
    split: Optional[str] = None
    source_sha256: Optional[str] = None

    def with_variants(self, variants):
        return replace(self, variants=tuple(variants))

    def with_split(self, split):
        return replace(self, split=split)

    def variant(self, codec, qf):
        """
        :rtype: Variant | None
        """
        for v in self.variants:
            if v.codec == codec and v.qf == qf:
                return v
        return None


@dataclass(frozen=True)
class Manifest(object):
    task: str
    frames: Tuple[LabeledFrame, ...]
    seed: int
    schema_version: int = SCHEMA_VERSION

    def frame(self, frame_id):
        for f in self.frames:
            if f.frame_id == frame_id:
                return f
        raise KeyError(frame_id)

    def in_split(self, split):
        """
        :param str split: train, val or test.
        :rtype: list[LabeledFrame]
        """
        return [f for f in self.frames if f.split == split]

    def with_frames(self, frames):
        return replace(self, frames=tuple(frames))


def corpus_dir(root, task, source_id):
    return os.path.join(root, 'corpus', task, source_id)


def encoder_log_dir(root):
    return os.path.join(root, 'logs', 'encoders')


def _rel(path, base):
    return None if path is None else os.path.relpath(path, base)


def _abs(path, base):
    return None if path is None else os.path.normpath(os.path.join(base, path))


def frame_to_record(frame, manifest, base):
    """
    :param LabeledFrame frame: The frame.
    :param Manifest manifest: The manifest it belongs to.
    :param str base: The directory paths are made relative to.
    :rtype: dict
    """
    dets = frame.detections
    return {
        'schema_version': manifest.schema_version,
        'task': manifest.task,
        'seed': manifest.seed,
        'frame_id': frame.frame_id,
        'source_path': _rel(frame.source.path, base),
        'source_sha256': frame.source_sha256,
        'width': frame.source.width,
        'height': frame.source.height,
        'bit_depth': frame.source.bit_depth,
        'colorspace': frame.source.colorspace,
        'gt': {
            'boxes': [list(d.box.as_tuple()) for d in dets],
            'classes': [d.class_id for d in dets],
            'confidences': [d.confidence for d in dets],
            'strings': [s.chars for s in frame.plate_strings],
            'person_id': frame.person_id,
            'database_path': _rel(
                frame.database.path if frame.database else None, base
            ),
        },
        'variants': [
            {'codec': v.codec, 'qf': v.qf, 'path': _rel(v.image.path, base),
             'psnr_db': v.psnr_db}
            for v in frame.variants
        ],
        'split': frame.split,
    }


def frame_from_record(record, base):
    """
    :param dict record: A frame record.
    :param str base: The directory relative paths start from.
    :rtype: LabeledFrame
    """
    def image(path):
        return ImageRef(_abs(path, base), record['width'], record['height'],
                        record.get('bit_depth', 8),
                        record.get('colorspace', 'L'))

    gt = record['gt']
    detections = tuple(
        Detection(BoundingBox.from_list(box), int(cls), float(conf))
        for box, cls, conf in zip(gt['boxes'], gt['classes'],
                                  gt['confidences'])
    )
    database = gt.get('database_path')
    return LabeledFrame(
        frame_id=record['frame_id'],
        source=image(record['source_path']),
        detections=detections,
        plate_strings=tuple(PlateString(s) for s in gt.get('strings', [])),
        variants=tuple(
            Variant(v['codec'], int(v['qf']), image(v['path']),
                    float(v['psnr_db']))
            for v in record['variants']
        ),
        person_id=gt.get('person_id'),
        database=None if database is None else ImageRef.from_path(
            _abs(database, base)
        ),
        split=record.get('split'),
        source_sha256=record.get('source_sha256'),
    )


def write_manifest(path, manifest):
    """
    Writes a manifest atomically, frames sorted by id.

    :param str path: The destination file.
    :param Manifest manifest: The manifest.
    """
    base = os.path.dirname(os.path.abspath(path))
    write_jsonl(path, [
        frame_to_record(f, manifest, base)
        for f in sorted(manifest.frames, key=lambda f: f.frame_id)
    ])


def read_manifest(path, expected_version=SCHEMA_VERSION):
    """
    :param str path: The manifest file.
    :param int expected_version: The schema version this code understands.
    :rtype: Manifest
    :raise SchemaVersionError: if a record has another schema version.
    """
    base = os.path.dirname(os.path.abspath(path))
    records = read_jsonl(path)
    for r in records:
        if r.get('schema_version') != expected_version:
            raise SchemaVersionError(path, expected_version,
                                     r.get('schema_version'))
    if len(records) == 0:
        raise ValueError('manifest {} has no frame'.format(path))

    tasks = {r['task'] for r in records}
    if len(tasks) != 1:
        raise ValueError('manifest {} mixes tasks: {}'.format(
            path, ', '.join(sorted(tasks))
        ))
    return Manifest(
        task=records[0]['task'],
        frames=tuple(frame_from_record(r, base) for r in records),
        seed=records[0]['seed'],
        schema_version=expected_version,
    )


def check_split_hygiene(manifest):
    """
    Checks that the manifest can be trained on without leakage: frame ids are
    unique, every frame belongs to a known split, and frames which share a
    source digest or a person never sit in different splits.

    :param Manifest manifest: The manifest.
    :raise ValueError: describing the first problem found.
    """
    seen = set()
    owner = {}
    for f in manifest.frames:
        if f.frame_id in seen:
            raise ValueError('duplicate frame id {}'.format(f.frame_id))
        seen.add(f.frame_id)
        if f.split not in SPLITS:
            raise ValueError('frame {} has no valid split: {!r}'.format(
                f.frame_id, f.split
            ))
        for key in (('sha256', f.source_sha256), ('person', f.person_id)):
            if key[1] is None:
                continue
            other = owner.setdefault(key, (f.frame_id, f.split))
            if other[1] != f.split:
                raise ValueError(
                    'frames {} ({}) and {} ({}) share a {} across splits'
                    .format(other[0], other[1], f.frame_id, f.split, key[0])
                )
