"""
Adapters over externally provided TorchScript networks. No model file is
shipped; `model_path` comes from the backend options.

Preprocessing is part of the identity of each adapter:

detector
    RGB, bilinear resize to `input_size` (width, height), values / 255,
    NCHW float32. The network returns rows (x0, y0, x1, y1, confidence,
    class) in input coordinates; boxes are scaled back and clipped.
embedder
    RGB, bilinear resize to 112x112, (x - 127.5) / 128. The network returns
    one D-vector.
recognizer
    Grayscale, bilinear resize to 94x24, values / 255. The network returns
    logits shaped (classes, steps) or (1, classes, steps); decoding is greedy
    CTC with blank index 0, classes 1.. mapping to the alphabet. The
    confidence is the mean per-step maximum probability.
"""

import numpy as np
import torch
from funcy import memoize

from mvqa.backends.support import (
    DetectorBackend, FaceEmbedder, PlateRecognizer, clip_detections
)
from mvqa.core.errors import BackendError, InvalidEmbeddingError
from mvqa.core.images import as_array, convert_channels, resize
from mvqa.core.types import (
    BoundingBox, DEFAULT_PLATE_ALPHABET, Detection, EmbeddingVector,
    PlateString
)


@memoize
def _load(model_path):
    try:
        module = torch.jit.load(model_path, map_location='cpu')
    except (RuntimeError, ValueError, OSError) as e:
        raise BackendError('cannot load {}: {}'.format(model_path, e)) from e
    module.eval()
    return module


def _to_tensor(array, scale, offset=0.0):
    x = (np.asarray(array, dtype=np.float32) - offset) / scale
    if x.ndim == 2:
        x = x[None, :, :]
    else:
        x = np.transpose(x, (2, 0, 1))
    return torch.from_numpy(np.ascontiguousarray(x))[None]


class _TorchScriptBackend(object):
    def __init__(self, model_path):
        if not model_path:
            raise BackendError('torchscript backend requires a model_path')
        self.model_path = model_path

    def name(self):
        return 'torchscript:{}'.format(self.model_path)

    def _run(self, tensor):
        try:
            with torch.inference_mode():
                return _load(self.model_path)(tensor)
        except BackendError:
            raise
        except Exception as e:
            raise BackendError('{} failed: {}'.format(self.name(), e)) from e


class TorchScriptDetector(_TorchScriptBackend, DetectorBackend):
    def __init__(self, model_path=None, task='object', input_size=(640, 640)):
        super(TorchScriptDetector, self).__init__(model_path)
        self._task = task
        self.input_size = tuple(input_size)

    def task(self):
        return self._task

    def detect(self, image):
        array = convert_channels(as_array(image), 3)
        height, width = array.shape[:2]
        out = self._run(_to_tensor(resize(array, self.input_size), 255.0))
        rows = np.asarray(out.detach().cpu().numpy(), dtype=np.float64)
        rows = rows.reshape(-1, 6)
        sx = width / float(self.input_size[0])
        sy = height / float(self.input_size[1])

        detections = []
        for x0, y0, x1, y1, conf, cls in rows:
            x0, x1 = max(0.0, x0 * sx), max(0.0, x1 * sx)
            y0, y1 = max(0.0, y0 * sy), max(0.0, y1 * sy)
            if x0 < x1 and y0 < y1:
                detections.append(Detection(
                    BoundingBox(x0, y0, x1, y1), int(cls),
                    float(np.clip(conf, 0.0, 1.0))
                ))
        return clip_detections(detections, width, height)


class TorchScriptEmbedder(_TorchScriptBackend, FaceEmbedder):
    def __init__(self, model_path=None, dimension=512):
        super(TorchScriptEmbedder, self).__init__(model_path)
        self._dimension = dimension

    def dimension(self):
        return self._dimension

    def embed(self, image):
        array = convert_channels(as_array(image), 3)
        out = self._run(_to_tensor(resize(array, (112, 112)), 128.0, 127.5))
        values = out.detach().cpu().numpy().ravel().astype(np.float64)
        if len(values) != self._dimension:
            raise BackendError('{} returned {} values, expected {}'.format(
                self.name(), len(values), self._dimension
            ))
        if not np.any(values):
            raise InvalidEmbeddingError('zero embedding')
        return EmbeddingVector.from_array(values)


class TorchScriptRecognizer(_TorchScriptBackend, PlateRecognizer):
    def __init__(self, model_path=None, alphabet=DEFAULT_PLATE_ALPHABET):
        super(TorchScriptRecognizer, self).__init__(model_path)
        self._alphabet = alphabet

    def alphabet(self):
        return self._alphabet

    def recognize_plate(self, image):
        array = convert_channels(as_array(image), 1)
        out = self._run(_to_tensor(resize(array, (94, 24)), 255.0))
        logits = out.detach().cpu().reshape(out.shape[-2], out.shape[-1])
        return ctc_greedy_decode(logits, self._alphabet)


def ctc_greedy_decode(logits, alphabet):
    """
    Decodes (classes, steps) logits: best class per step, repeats collapsed,
    blanks (class 0) removed.

    :param torch.Tensor logits: The network output.
    :param str alphabet: The characters of classes 1...
    :rtype: PlateString
    """
    probs = torch.softmax(logits.double(), dim=0)
    best_p, best = probs.max(dim=0)
    chars = []
    previous = 0
    for k in best.tolist():
        if k != previous and k != 0 and k - 1 < len(alphabet):
            chars.append(alphabet[k - 1])
        previous = k
    confidence = float(best_p.mean()) if best_p.numel() else 0.0
    return PlateString(''.join(chars), min(1.0, max(0.0, confidence)))


def detector(**options):
    return TorchScriptDetector(**options)


def embedder(**options):
    return TorchScriptEmbedder(**options)


def recognizer(**options):
    return TorchScriptRecognizer(**options)
