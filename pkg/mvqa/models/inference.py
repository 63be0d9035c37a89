import hashlib

import numpy as np
import torch

from mvqa.core.errors import ModelInputError
from mvqa.core.images import as_array, convert_channels, resize


def prepare_crop(image, size, channels):
    """
    Brings a crop to a model's input resolution (bilinear resampling) and
    channel count.

    :param ImageRef | np.ndarray image: The crop.
    :param (int, int) size: The model's input width and height.
    :param int channels: 1 or 3.
    :rtype: np.ndarray
    """
    return resize(convert_channels(as_array(image), channels), size)


def _check_crop(model, crop):
    crop = np.asarray(crop)
    width, height = model.input_size
    expected = (height, width) if model.in_channels == 1 else \
        (height, width, model.in_channels)
    if crop.ndim == 3 and crop.shape[2] == 1 and model.in_channels == 1:
        crop = crop[:, :, 0]
    if crop.shape != expected:
        raise ModelInputError(
            'crop of shape {} given to a model expecting {} (use '
            'prepare_crop)'.format(crop.shape, expected)
        )
    return crop


def crops_to_tensor(crops):
    """
    Stacks 8-bit crops of identical shape into an (N, C, H, W) float tensor
    with values in [0, 1].

    :param list[np.ndarray] crops: The crops.
    :rtype: torch.Tensor
    """
    batch = np.stack([np.asarray(c, dtype=np.float32) for c in crops]) / 255.0
    if batch.ndim == 3:
        batch = batch[:, None]
    else:
        batch = np.transpose(batch, (0, 3, 1, 2))
    return torch.from_numpy(np.ascontiguousarray(batch))


def _evaluate(model, *inputs):
    model.eval()
    with torch.inference_mode():
        return model(*inputs)


def predict_detection_quality(model, ref_crop, compressed_crop):
    """
    :param DetectionQualityModel model: The model.
    :param np.ndarray ref_crop: The reference crop, at model resolution.
    :param np.ndarray compressed_crop: The compressed crop, at model
        resolution.
    :rtype: float
    :raise ModelInputError: if a crop does not have the model's shape.
    """
    ref = crops_to_tensor([_check_crop(model, ref_crop)])
    comp = crops_to_tensor([_check_crop(model, compressed_crop)])
    return float(_evaluate(model, ref, comp)[0])


def _digest(crop):
    return hashlib.sha256(np.ascontiguousarray(crop).tobytes()).hexdigest()


def canonical_pairs(pairs):
    """
    Orders (reference, compressed) pairs by the digest of their content.

    :param list[(np.ndarray, np.ndarray)] pairs: The pairs.
    :rtype: list[(np.ndarray, np.ndarray)]
    """
    return sorted(pairs, key=lambda p: (_digest(p[0]), _digest(p[1])))


def predict_face_quality(model, pairs):
    """
    Predicts the face degradation of a set of (reference, compressed) query
    pairs. Sets larger than the model's subset size are processed in chunks
    whose outputs are averaged with weights proportional to their size.

    :param FaceQualityModel model: The model.
    :param list[(np.ndarray, np.ndarray)] pairs: The crops, at model
        resolution.
    :rtype: float
    """
    if len(pairs) == 0:
        raise ValueError('face quality needs at least one pair')
    pairs = canonical_pairs([
        (_check_crop(model, r), _check_crop(model, c)) for r, c in pairs
    ])

    total = 0.0
    n = model.subset_size
    for start in range(0, len(pairs), n):
        chunk = pairs[start:start + n]
        ref = crops_to_tensor([r for r, _ in chunk])[None]
        comp = crops_to_tensor([c for _, c in chunk])[None]
        total += len(chunk) * float(_evaluate(model, ref, comp)[0])
    return total / len(pairs)


def predict_plate_quality(model, compressed_crop):
    """
    :param PlateQualityModel model: The model.
    :param np.ndarray compressed_crop: The crop, at model resolution.
    :rtype: float
    """
    comp = crops_to_tensor([_check_crop(model, compressed_crop)])
    return float(_evaluate(model, comp)[0])
