"""
Metric modules loaded by path in the metric loading tests.
"""

import numpy as np

from mvqa.metrics.support import MetricPlugin


class MeanAbsoluteError(MetricPlugin):
    def __init__(self, scale=1.0):
        self.scale = scale

    @classmethod
    def name(cls):
        return 'mae'

    @classmethod
    def description(cls):
        return 'mean absolute pixel difference'

    def higher_is_better(self):
        return False

    def score(self, item):
        diff = np.asarray(item.reference, dtype=np.float64) - \
            np.asarray(item.distorted, dtype=np.float64)
        return self.scale * float(np.mean(np.abs(diff)))


metric = MeanAbsoluteError
