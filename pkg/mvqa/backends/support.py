"""
Interfaces of the machine-vision algorithms that targets are computed
against.

A backend module exports factories named `detector`, `embedder` and/or
`recognizer`, each called with the backend options of the configuration and
returning an instance of the matching interface.
"""

from mvqa.core.types import DEFAULT_PLATE_ALPHABET, Detection


class Backend(object):
    def name(self):
        """
        Returns the name of the backend, which is part of the provenance of
        every target computed with it.
        :rtype: str
        """
        raise NotImplementedError

    def parallel_safe(self):
        """
        Returns True if the backend may be used from several worker processes
        at once. Otherwise the pipeline calls it from a single process.
        :rtype: bool
        """
        return False


class DetectorBackend(Backend):
    def task(self):
        """
        Returns the task tag this detector serves: object, face or plate.
        :rtype: str
        """
        raise NotImplementedError

    def confidence_range(self):
        return 0.0, 1.0

    def detect(self, image):
        """
        Returns the detections found in the image, boxes clipped to the image.

        :param ImageRef image: The image.
        :rtype: list[Detection]
        """
        raise NotImplementedError


class FaceEmbedder(Backend):
    def dimension(self):
        """
        :rtype: int
        """
        raise NotImplementedError

    def embed(self, image):
        """
        :param ImageRef image: A face crop.
        :rtype: EmbeddingVector
        :raise InvalidEmbeddingError: if the image holds no usable face.
        """
        raise NotImplementedError


class PlateRecognizer(Backend):
    def alphabet(self):
        return DEFAULT_PLATE_ALPHABET

    def recognize_plate(self, image):
        """
        :param ImageRef image: A plate crop.
        :rtype: PlateString
        """
        raise NotImplementedError


def clip_detections(detections, width, height):
    """
    Clips detection boxes to the image, dropping those left without area.

    :param list[Detection] detections: The raw detections.
    :rtype: list[Detection]
    """
    res = []
    for d in detections:
        box = d.box.clipped(width, height)
        if box is not None:
            res.append(Detection(box, d.class_id, d.confidence))
    return res
