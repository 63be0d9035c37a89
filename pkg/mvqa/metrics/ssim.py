"""
Structural similarity with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
K2 = 0.03. The SSIM map is averaged over the positions where the window fits
inside the image, then over channels. Images smaller than the window are
filtered with reflected borders and averaged over every position.
"""

import numpy as np
from scipy import ndimage

from mvqa.core.errors import ImageMismatchError
from mvqa.metrics.support import MetricPlugin

WINDOW = 11
SIGMA = 1.5
K1, K2 = 0.01, 0.03

_RADIUS = WINDOW // 2


def _filter(x):
    return ndimage.gaussian_filter(x, SIGMA, mode='reflect',
                                   truncate=_RADIUS / SIGMA)


def _ssim_channel(a, b, peak):
    c1, c2 = (K1 * peak) ** 2, (K2 * peak) ** 2
    mu_a, mu_b = _filter(a), _filter(b)
    var_a = _filter(a * a) - mu_a * mu_a
    var_b = _filter(b * b) - mu_b * mu_b
    cov = _filter(a * b) - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / \
        ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))

    height, width = a.shape
    if height >= WINDOW and width >= WINDOW:
        ssim_map = ssim_map[_RADIUS:height - _RADIUS, _RADIUS:width - _RADIUS]
    return float(ssim_map.mean())


def baseline_ssim(ref, dist, bit_depth=8):
    """
    :param np.ndarray ref: The reference pixels, (H, W) or (H, W, C).
    :param np.ndarray dist: The distorted pixels, same shape.
    :param int bit_depth: The bits per channel.
    :rtype: float
    """
    ref = np.asarray(ref, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    if ref.shape != dist.shape:
        raise ImageMismatchError('shape mismatch: {} vs {}'.format(
            ref.shape, dist.shape
        ))
    peak = float(2 ** bit_depth - 1)
    if ref.ndim == 2:
        return _ssim_channel(ref, dist, peak)
    return float(np.mean([
        _ssim_channel(ref[:, :, c], dist[:, :, c], peak)
        for c in range(ref.shape[2])
    ]))


class SsimMetric(MetricPlugin):
    @classmethod
    def name(cls):
        return 'ssim'

    @classmethod
    def description(cls):
        return 'structural similarity, 11x11 Gaussian window'

    def higher_is_better(self):
        return True

    def score(self, item):
        return baseline_ssim(item.reference, item.distorted)


metric = SsimMetric
