"""
Domain types shared by every part of the toolkit.

Boxes are half-open continuous rectangles in pixel units, with the origin at
the top-left corner of the image. Backend adapters convert their own
conventions to this one.
"""

import math
import os
import unicodedata
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from PIL import Image

from mvqa.tools import logger

DEFAULT_PLATE_ALPHABET = 'ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789'


@dataclass(frozen=True)
class BoundingBox(object):
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError('non-finite box coordinates: {}'.format(coords))
        if min(coords) < 0:
            raise ValueError('negative box coordinates: {}'.format(coords))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError('degenerate box: {}'.format(coords))

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def area(self):
        return self.width * self.height

    def as_tuple(self):
        return self.x_min, self.y_min, self.x_max, self.y_max

    def translated(self, dx, dy):
        return BoundingBox(self.x_min + dx, self.y_min + dy,
                           self.x_max + dx, self.y_max + dy)

    def clipped(self, width, height):
        """
        Returns this box restricted to an image of the given size, or None if
        nothing of the box lies inside the image.

        :param float width: The image width.
        :param float height: The image height.
        :rtype: BoundingBox | None
        """
        x0, y0 = max(self.x_min, 0.0), max(self.y_min, 0.0)
        x1, y1 = min(self.x_max, float(width)), min(self.y_max, float(height))
        if x0 >= x1 or y0 >= y1:
            return None
        return BoundingBox(x0, y0, x1, y1)

    def padded(self, fraction):
        """
        Grows the box by the given fraction of its size on each side. The
        result may extend past the image and is floored at 0.

        :param float fraction: The padding fraction, >= 0.
        :rtype: BoundingBox
        """
        dx, dy = self.width * fraction, self.height * fraction
        return BoundingBox(max(self.x_min - dx, 0.0), max(self.y_min - dy, 0.0),
                           self.x_max + dx, self.y_max + dy)

    @staticmethod
    def from_list(coords):
        return BoundingBox(*(float(c) for c in coords))


@dataclass(frozen=True)
class Detection(object):
    box: BoundingBox
    class_id: int = 0
    confidence: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(
                'confidence out of [0, 1]: {}'.format(self.confidence)
            )


@dataclass(frozen=True)
class EmbeddingVector(object):
    values: Tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError('non-finite embedding entries')

    def __len__(self):
        return len(self.values)

    def as_array(self):
        return np.asarray(self.values, dtype=np.float64)

    @staticmethod
    def from_array(array):
        return EmbeddingVector(tuple(float(v) for v in np.ravel(array)))


@dataclass(frozen=True)
class PlateString(object):
    chars: str
    confidence: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(
                'confidence out of [0, 1]: {}'.format(self.confidence)
            )

    def __len__(self):
        return len(self.chars)

    @staticmethod
    def normalized(text, alphabet=DEFAULT_PLATE_ALPHABET, confidence=1.0):
        """
        Builds a plate string restricted to the given alphabet: letters are
        upper-cased, full-width forms are folded to ASCII and characters
        outside of the alphabet are dropped. Any change is logged.

        :param str text: The raw text.
        :param str alphabet: The allowed characters.
        :param float confidence: The recognition confidence.
        :rtype: PlateString
        """
        folded = unicodedata.normalize('NFKC', text).upper()
        chars = ''.join(c for c in folded if c in alphabet)
        if chars != text:
            logger.log('debug', 'normalized plate string',
                       raw=text, normalized=chars)
        return PlateString(chars, confidence)


@dataclass(frozen=True)
class ImageRef(object):
    """
    A handle on an image, either a file on disk or an in-memory array.
    """
    path: Optional[str]
    width: int
    height: int
    bit_depth: int = 8
    colorspace: str = 'L'
    _array: Optional[np.ndarray] = field(default=None, compare=False,
                                         repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError('image must be at least 1x1, got {}x{}'.format(
                self.width, self.height
            ))

    @property
    def channels(self):
        return 1 if self.colorspace == 'L' else 3

    @staticmethod
    def from_path(path):
        """
        :param str path: The image file.
        :rtype: ImageRef
        """
        with Image.open(path) as img:
            width, height = img.size
            mode = img.mode
        colorspace = 'L' if mode in ('L', '1', 'I;16', 'I') else 'RGB'
        bit_depth = 16 if mode.startswith('I') else 8
        return ImageRef(os.fspath(path), width, height, bit_depth, colorspace)

    @staticmethod
    def from_array(array, bit_depth=8, path=None):
        """
        Wraps an (H, W) or (H, W, 3) array. The array is copied and made
        read-only.

        :param np.ndarray array: The pixels.
        :param int bit_depth: The bits per channel.
        :param str | None path: An optional file the array comes from.
        :rtype: ImageRef
        """
        array = np.array(array, copy=True)
        array.setflags(write=False)
        if array.ndim == 2:
            colorspace = 'L'
        elif array.ndim == 3 and array.shape[2] == 3:
            colorspace = 'RGB'
        else:
            raise ValueError('unsupported image shape {}'.format(array.shape))
        return ImageRef(path, array.shape[1], array.shape[0], bit_depth,
                        colorspace, array)

    def load(self):
        """
        Returns the pixels of this image.

        :rtype: np.ndarray
        """
        if self._array is not None:
            return self._array
        if self.path is None:
            raise ValueError('image has neither a path nor pixels')
        with Image.open(self.path) as img:
            if self.colorspace == 'RGB' and img.mode != 'RGB':
                img = img.convert('RGB')
            elif self.colorspace == 'L' and img.mode not in ('L', 'I;16',
                                                             'I'):
                img = img.convert('L')
            array = np.asarray(img)
        if array.shape[:2] != (self.height, self.width):
            raise ValueError('{} changed size on disk'.format(self.path))
        return array
