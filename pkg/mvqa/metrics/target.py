"""
Echoes the machine-vision target of each item. Its correlation with the
target is 1 by construction, which makes it a sanity check of the
evaluation harness.
"""

from mvqa.metrics.support import MetricPlugin
from mvqa.targets.kinds import kind_by_name


class TargetMetric(MetricPlugin):
    def __init__(self, target='delta_object_iou'):
        self.target = target
        self._higher_is_better = kind_by_name(target).higher_is_better()

    @classmethod
    def name(cls):
        return 'target'

    @classmethod
    def description(cls):
        return 'the evaluated target itself'

    def reference(self):
        return MetricPlugin.NO_REFERENCE

    def higher_is_better(self):
        return self._higher_is_better

    def score(self, item):
        return item.target


metric = TargetMetric
