"""
Seeded generators of small synthetic corpora, rendered so that the
synthetic backends read them exactly when they are not compressed:

* object and face scenes: flat rectangles on a flat background, one per
  cell of a coarse grid so that objects never touch;
* plate scenes: bright plates carrying dark text in the backend font;
* persons: face proxies whose identity is a 4x4 pattern, photographed
  several times with jitter and sensor noise.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mvqa.backends.synthetic import render_text_mask
from mvqa.core.types import (
    BoundingBox, DEFAULT_PLATE_ALPHABET, Detection, PlateString
)
from mvqa.core.utils import stable_seed

SCENE_SIZE = (160, 120)
BACKGROUND = 128
CELL = 40
CELL_MARGIN = 5
OBJECT_SIZE = (14, 26)
OBJECT_CONTRAST = (72, 112)

PLATE_LEVEL = 230
GLYPH_CONTRAST = (36, 160)
PLATE_LENGTH = (5, 7)
PLATE_BAND = 60

PERSON_SIZE = 64
PERSON_BACKGROUND = 60
FACE_LEVEL = 150
FACE_SIZE = 32
PATTERN_AMPLITUDE = 30
PERSON_JITTER = 2
PERSON_NOISE = (2.0, 10.0)


@dataclass(frozen=True)
class SyntheticSource(object):
    source_id: str
    pixels: np.ndarray
    detections: Tuple[Detection, ...] = ()
    plate_strings: Tuple[PlateString, ...] = ()
    person_id: Optional[str] = None


def _rng(*parts):
    return np.random.default_rng(stable_seed(*parts))


def object_scene(rng, task='object', size=SCENE_SIZE):
    """
    Renders up to four rectangles on a flat background. In the object task
    bright rectangles are class 1 and dark ones class 0; faces are bright,
    taller than wide and carry two darker eyes.

    :param np.random.Generator rng: The random source.
    :param str task: 'object' or 'face'.
    :param (int, int) size: The scene width and height.
    :rtype: (np.ndarray, list[Detection])
    """
    width, height = size
    cols, rows = width // CELL, height // CELL
    pixels = np.full((height, width), BACKGROUND, dtype=np.int32)
    count = int(rng.integers(1, 5))
    cells = sorted(rng.choice(cols * rows, size=count, replace=False))

    detections = []
    for cell in cells:
        cx, cy = (cell % cols) * CELL, (cell // cols) * CELL
        w = int(rng.integers(OBJECT_SIZE[0], OBJECT_SIZE[1] + 1))
        h = int(rng.integers(OBJECT_SIZE[0], OBJECT_SIZE[1] + 1))
        if task == 'face':
            h = min(CELL - 2 * CELL_MARGIN, int(round(1.25 * w)))
        x0 = cx + int(rng.integers(CELL_MARGIN, CELL - CELL_MARGIN - w + 1))
        y0 = cy + int(rng.integers(CELL_MARGIN, CELL - CELL_MARGIN - h + 1))
        contrast = int(rng.integers(OBJECT_CONTRAST[0],
                                    OBJECT_CONTRAST[1] + 1))
        bright = task == 'face' or bool(rng.integers(0, 2))
        level = BACKGROUND + contrast if bright else BACKGROUND - contrast
        pixels[y0:y0 + h, x0:x0 + w] = level

        if task == 'face':
            ey = y0 + h // 3
            for ex in (x0 + w // 4, x0 + (3 * w) // 4 - 2):
                pixels[ey:ey + 2, ex:ex + 3] = level - 40

        class_id = 1 if (bright and task == 'object') else 0
        detections.append(
            Detection(BoundingBox(x0, y0, x0 + w, y0 + h), class_id, 1.0)
        )

    return pixels.astype(np.uint8), detections


def plate_scene(rng, size=SCENE_SIZE, alphabet=DEFAULT_PLATE_ALPHABET):
    """
    Renders one or two plates, each in its own horizontal band.

    :param np.random.Generator rng: The random source.
    :param (int, int) size: The scene width and height.
    :param str alphabet: The characters plates are drawn from.
    :rtype: (np.ndarray, list[Detection], list[PlateString])
    """
    width, height = size
    pixels = np.full((height, width), BACKGROUND, dtype=np.int32)
    bands = height // PLATE_BAND
    count = int(rng.integers(1, bands + 1))
    chars = list(alphabet)

    detections, strings = [], []
    for band in range(count):
        scale = int(rng.choice([1, 2]))
        n = int(rng.integers(PLATE_LENGTH[0], PLATE_LENGTH[1] + 1))
        text = ''.join(rng.choice(chars, size=n))
        mask = render_text_mask(text, scale)
        margin = 3 * scale
        pw, ph = mask.shape[1] + 2 * margin, mask.shape[0] + 2 * margin

        x0 = int(rng.integers(8, width - 8 - pw + 1))
        y0 = band * PLATE_BAND + int(rng.integers(8, PLATE_BAND - 8 - ph + 1))
        glyph = PLATE_LEVEL - int(rng.integers(GLYPH_CONTRAST[0],
                                               GLYPH_CONTRAST[1] + 1))

        plate = np.full((ph, pw), PLATE_LEVEL, dtype=np.int32)
        plate[margin:margin + mask.shape[0],
              margin:margin + mask.shape[1]][mask] = glyph
        pixels[y0:y0 + ph, x0:x0 + pw] = plate

        detections.append(
            Detection(BoundingBox(x0, y0, x0 + pw, y0 + ph), 0, 1.0)
        )
        strings.append(PlateString(text, 1.0))

    return pixels.astype(np.uint8), detections, strings


def identity_pattern(rng):
    """
    :param np.random.Generator rng: The random source.
    :rtype: np.ndarray
    """
    return rng.integers(-PATTERN_AMPLITUDE, PATTERN_AMPLITUDE + 1,
                        size=(4, 4))


def person_image(rng, pattern):
    """
    Photographs a face proxy: the identity pattern upscaled to the face
    size, shifted by a few pixels and with Gaussian noise.

    :param np.random.Generator rng: The random source.
    :param np.ndarray pattern: The 4x4 identity pattern.
    :rtype: np.ndarray
    """
    pixels = np.full((PERSON_SIZE, PERSON_SIZE), PERSON_BACKGROUND,
                     dtype=np.float64)
    face = FACE_LEVEL + np.kron(pattern, np.ones((FACE_SIZE // 4,
                                                  FACE_SIZE // 4)))
    dx, dy = rng.integers(-PERSON_JITTER, PERSON_JITTER + 1, size=2)
    x0 = (PERSON_SIZE - FACE_SIZE) // 2 + int(dx)
    y0 = (PERSON_SIZE - FACE_SIZE) // 2 + int(dy)
    pixels[y0:y0 + FACE_SIZE, x0:x0 + FACE_SIZE] = face
    sigma = float(rng.uniform(*PERSON_NOISE))
    pixels += rng.normal(0.0, sigma, size=pixels.shape)
    return np.clip(np.rint(pixels), 0, 255).astype(np.uint8)


def generate_corpus(task, count, seed, images_per_person=3):
    """
    Generates a corpus for a task. Every item only depends on the seed and
    its index, so a larger corpus extends a smaller one.

    For the face_recognition task, each person yields one source per image,
    all sharing the person id.

    :param str task: object, face, plate or face_recognition.
    :param int count: The number of scenes, or persons.
    :param int seed: The corpus seed.
    :param int images_per_person: Images rendered per person.
    :rtype: list[SyntheticSource]
    """
    sources = []
    for index in range(count):
        rng = _rng('corpus', task, seed, index)
        if task in ('object', 'face'):
            pixels, dets = object_scene(rng, task)
            sources.append(SyntheticSource('{}{:04d}'.format(task, index),
                                           pixels, tuple(dets)))
        elif task == 'plate':
            pixels, dets, strings = plate_scene(rng)
            sources.append(SyntheticSource('plate{:04d}'.format(index),
                                           pixels, tuple(dets),
                                           tuple(strings)))
        elif task == 'face_recognition':
            person_id = 'person{:04d}'.format(index)
            pattern = identity_pattern(rng)
            for k in range(images_per_person):
                sources.append(SyntheticSource(
                    '{}_{}'.format(person_id, k),
                    person_image(rng, pattern), person_id=person_id
                ))
        else:
            raise ValueError('no synthetic corpus for task {!r}'.format(task))
    return sources
