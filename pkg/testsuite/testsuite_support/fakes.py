"""
Scripted backends, for tests which need to control exactly what a backend
answers.
"""

from mvqa.backends.support import (
    DetectorBackend, FaceEmbedder, PlateRecognizer
)
from mvqa.core.types import EmbeddingVector, PlateString


class ScriptedDetector(DetectorBackend):
    """
    Answers the detections registered for an image path, and records the
    paths it was called on.
    """
    def __init__(self, answers, task='object'):
        self.answers = answers
        self._task = task
        self.calls = []

    def name(self):
        return 'scripted-detector'

    def task(self):
        return self._task

    def detect(self, image):
        self.calls.append(image.path)
        return list(self.answers.get(image.path, []))


class ScriptedRecognizer(PlateRecognizer):
    """
    Reads plates in order from a list of (chars, confidence) answers.
    """
    def __init__(self, answers):
        self.answers = list(answers)

    def name(self):
        return 'scripted-recognizer'

    def recognize_plate(self, image):
        chars, confidence = self.answers.pop(0)
        return PlateString(chars, confidence)


class MeanEmbedder(FaceEmbedder):
    def name(self):
        return 'mean-embedder'

    def dimension(self):
        return 2

    def embed(self, image):
        pixels = image.load()
        return EmbeddingVector((float(pixels.mean()) + 1.0, 1.0))
