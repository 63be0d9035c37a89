import math

import numpy as np

from mvqa.core.errors import InvalidEmbeddingError
from mvqa.core.types import EmbeddingVector


def iou(a, b):
    """
    Returns the intersection over union of two boxes.

    :param BoundingBox a: The first box.
    :param BoundingBox b: The second box.
    :rtype: float
    """
    inter_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    inter_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def _as_vector(x):
    if isinstance(x, EmbeddingVector):
        return x.as_array()
    return np.asarray(x, dtype=np.float64).ravel()


def cosine_similarity(a, b):
    """
    Returns the cosine of the angle between two embeddings, clamped to
    [-1, 1].

    :param EmbeddingVector | np.ndarray a: The first embedding.
    :param EmbeddingVector | np.ndarray b: The second embedding.
    :rtype: float
    :raise InvalidEmbeddingError: if the lengths differ or a vector has no
        direction.
    """
    u, v = _as_vector(a), _as_vector(b)
    if u.shape != v.shape:
        raise InvalidEmbeddingError(
            'embedding lengths differ: {} vs {}'.format(len(u), len(v))
        )
    uu, vv = float(np.dot(u, u)), float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        raise InvalidEmbeddingError('zero-norm embedding')
    if not (math.isfinite(uu) and math.isfinite(vv)):
        raise InvalidEmbeddingError('non-finite embedding')
    # sqrt of the product keeps (v, v) at exactly 1
    res = float(np.dot(u, v)) / math.sqrt(uu * vv)
    return max(-1.0, min(1.0, res))
