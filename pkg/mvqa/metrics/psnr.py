"""
Peak signal-to-noise ratio of the distorted input against its reference.
"""

import numpy as np

from mvqa.dataset.codecs import psnr_arrays
from mvqa.metrics.support import MetricPlugin


def baseline_psnr(ref, dist, bit_depth=8):
    """
    :param np.ndarray ref: The reference pixels.
    :param np.ndarray dist: The distorted pixels.
    :rtype: float
    """
    return psnr_arrays(np.asarray(ref), np.asarray(dist), bit_depth)


class PsnrMetric(MetricPlugin):
    @classmethod
    def name(cls):
        return 'psnr'

    @classmethod
    def description(cls):
        return 'peak signal-to-noise ratio, capped at 100 dB'

    def higher_is_better(self):
        return True

    def score(self, item):
        return baseline_psnr(item.reference, item.distorted)


metric = PsnrMetric
