import json
import os
import shutil

import numpy as np
import pytest

from mvqa.core.errors import SchemaVersionError
from mvqa.core.images import save_image
from mvqa.core.types import BoundingBox, Detection, ImageRef, PlateString
from mvqa.dataset.manifest import (
    LabeledFrame, Manifest, Variant, check_split_hygiene, read_manifest,
    write_manifest
)


def saved(path, value):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    save_image(np.full((6, 8), value, dtype=np.uint8), path)
    return ImageRef.from_path(path)


def sample_manifest(root):
    root = str(root)
    frames = []
    for name, value in (('b', 40), ('a', 20)):
        source = saved(os.path.join(root, 'corpus', name, 'source.png'), value)
        variant = saved(os.path.join(root, 'corpus', name, 'jpeg_50.png'),
                        value + 1)
        frames.append(LabeledFrame(
            name, source,
            (Detection(BoundingBox(1.0, 1.0, 4.5, 5.0), 1, 0.875),),
            (PlateString('AB12'),),
            (Variant('jpeg', 50, variant, 48.13),),
            person_id='person_' + name,
            database=saved(os.path.join(root, 'corpus', name, 'db.png'),
                           value),
            split='train',
            source_sha256='{:064x}'.format(value),
        ))
    return Manifest('plate', tuple(frames), seed=7)


class TestManifestFile(object):
    def test_round_trip(self, tmp_path):
        manifest = sample_manifest(tmp_path)
        path = str(tmp_path / 'manifests' / 'labeled.jsonl')
        write_manifest(path, manifest)
        read = read_manifest(path)

        assert read.task == 'plate' and read.seed == 7
        assert [f.frame_id for f in read.frames] == ['a', 'b']
        assert read.frame('b') == manifest.frame('b')
        assert read.frame('a') == manifest.frame('a')

    def test_paths_are_relative(self, tmp_path):
        path = str(tmp_path / 'manifests' / 'labeled.jsonl')
        write_manifest(path, sample_manifest(tmp_path))
        with open(path, encoding='utf-8') as f:
            record = json.loads(f.readline())
        assert record['source_path'] == os.path.join('..', 'corpus', 'a',
                                                     'source.png')
        assert record['variants'][0]['path'] == os.path.join(
            '..', 'corpus', 'a', 'jpeg_50.png'
        )

    def test_moved_run_directory(self, tmp_path):
        old = tmp_path / 'old'
        write_manifest(str(old / 'manifests' / 'm.jsonl'),
                       sample_manifest(old))
        shutil.copytree(str(old), str(tmp_path / 'new'))
        shutil.rmtree(str(old))

        read = read_manifest(str(tmp_path / 'new' / 'manifests' / 'm.jsonl'))
        frame = read.frame('a')
        assert frame.source.path.startswith(str(tmp_path / 'new'))
        assert frame.source.load().shape == (6, 8)
        assert frame.variant('jpeg', 50).image.load()[0, 0] == 21
        assert frame.variant('jpeg', 90) is None

    def test_schema_version(self, tmp_path):
        path = str(tmp_path / 'manifests' / 'm.jsonl')
        write_manifest(path, sample_manifest(tmp_path))
        with pytest.raises(SchemaVersionError) as e:
            read_manifest(path, expected_version=2)
        assert e.value.expected == 2 and e.value.found == 1

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / 'empty.jsonl'
        path.write_text('')
        with pytest.raises(ValueError):
            read_manifest(str(path))


class TestSplitHygiene(object):
    def frame(self, frame_id, split, sha=None, person=None):
        return LabeledFrame(
            frame_id, ImageRef.from_array(np.zeros((2, 2), dtype=np.uint8)),
            split=split, source_sha256=sha, person_id=person
        )

    def check(self, *frames):
        check_split_hygiene(Manifest('object', frames, 0))

    def test_clean(self):
        self.check(self.frame('a', 'train', 'x'), self.frame('b', 'val', 'y'),
                   self.frame('c', 'train', 'x'))

    @pytest.mark.parametrize('frames', [
        [('a', 'train', None, None), ('a', 'val', None, None)],
        [('a', None, None, None)],
        [('a', 'holdout', None, None)],
        [('a', 'train', 'x', None), ('b', 'test', 'x', None)],
        [('a', 'train', None, 'p'), ('b', 'val', None, 'p')],
    ])
    def test_leaks(self, frames):
        with pytest.raises(ValueError):
            self.check(*(self.frame(*f) for f in frames))
