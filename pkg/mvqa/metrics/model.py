"""
A trained quality model used as a metric. The model predicts its target
directly, so it has the orientation of that target.
"""

import os

from mvqa.metrics.support import MetricPlugin
from mvqa.models.inference import (
    predict_detection_quality, predict_face_quality, predict_plate_quality,
    prepare_crop
)
from mvqa.models.serialization import load_model
from mvqa.targets.kinds import kind_by_name


class ModelMetric(MetricPlugin):
    def __init__(self, model_path, label=None):
        """
        :param str model_path: A file written by `save_model`.
        :param str | None label: The name under which the metric is
            reported. Defaults to the file name without extension.
        """
        self.model = load_model(model_path)
        if self.model.target is None:
            raise ValueError('{} does not record its target'.format(
                model_path
            ))
        self.label = label or os.path.splitext(
            os.path.basename(model_path)
        )[0]

    @classmethod
    def name(cls):
        return 'model'

    @classmethod
    def description(cls):
        return 'prediction of a trained quality model'

    def display_name(self):
        return self.label

    def reference(self):
        if self.model.kind == 'plate':
            return MetricPlugin.NO_REFERENCE
        return MetricPlugin.FULL_REFERENCE

    def higher_is_better(self):
        return kind_by_name(self.model.target).higher_is_better()

    def score(self, item):
        size, channels = self.model.input_size, self.model.in_channels
        dist = prepare_crop(item.distorted, size, channels)
        if self.model.kind == 'plate':
            return predict_plate_quality(self.model, dist)
        ref = prepare_crop(item.reference, size, channels)
        if self.model.kind == 'face':
            return predict_face_quality(self.model, [(ref, dist)])
        return predict_detection_quality(self.model, ref, dist)


metric = ModelMetric
