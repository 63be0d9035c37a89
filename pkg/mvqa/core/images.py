"""
Pixel helpers on top of Pillow and numpy.
"""

import numpy as np
from PIL import Image

# ITU-R BT.601 luma weights, as used by Pillow's "L" conversion
_LUMA = np.array([0.299, 0.587, 0.114])


def as_array(image):
    """
    :param ImageRef | np.ndarray image: The image.
    :rtype: np.ndarray
    """
    return image if isinstance(image, np.ndarray) else image.load()


def luma(image):
    """
    Returns the luma plane of an image as float64.

    :param ImageRef | np.ndarray image: The image.
    :rtype: np.ndarray
    """
    array = as_array(image).astype(np.float64)
    if array.ndim == 3:
        return array @ _LUMA
    return array


def to_pil(array, bit_depth=8):
    array = np.asarray(array)
    if bit_depth > 8:
        return Image.fromarray(array.astype(np.uint16), mode='I;16')
    return Image.fromarray(np.clip(np.rint(array), 0, 255).astype(np.uint8))


def save_image(array, path, **params):
    """
    Writes pixels to a file whose format is taken from its extension.

    :param np.ndarray array: The pixels.
    :param str path: The destination.
    """
    to_pil(array).save(path, **params)


def crop(array, window):
    """
    :param np.ndarray array: The pixels.
    :param (int, int, int, int) window: x0, y0, x1, y1 in whole pixels.
    :rtype: np.ndarray
    """
    x0, y0, x1, y1 = window
    return array[y0:y1, x0:x1]


def resize(array, size, resample=Image.BILINEAR):
    """
    Resizes 8-bit pixels to (width, height).

    :param np.ndarray array: The pixels.
    :param (int, int) size: The target width and height.
    :param int resample: A Pillow resampling filter.
    :rtype: np.ndarray
    """
    img = to_pil(array)
    if img.size == tuple(size):
        return np.asarray(img)
    return np.asarray(img.resize(tuple(size), resample=resample))


def convert_channels(array, channels):
    """
    Converts between single-channel and RGB pixels.

    :param np.ndarray array: The pixels.
    :param int channels: 1 or 3.
    :rtype: np.ndarray
    """
    if channels == 1:
        if array.ndim == 3:
            return np.asarray(to_pil(array).convert('L'))
        return array
    if array.ndim == 2:
        return np.repeat(array[:, :, None], 3, axis=2)
    return array
