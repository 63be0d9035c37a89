"""
Deterministic stand-ins for the detector, face embedder and plate recognizer,
designed for the scenes rendered by mvqa.dataset.synthetic.

Detector
    The background level is the median luma. The luma difference to the
    background is smoothed (Gaussian, sigma 1.5) and thresholded at 24;
    connected components of at least 16 pixels (holes filled) are objects.
    For each component of contrast C (median signed difference), the
    coverage of every pixel within 3 pixels of it is clip(diff / C, 0, 1),
    forced to 1 in the component interior (eroded by 2 pixels). Box edges are
    read with sub-pixel precision from the normalized column and row coverage
    profiles: they are exact on clean renders with integer edges.
    The confidence is min(1, C / 96) * C^2 / (C^2 + s^2), where s is the
    robust spread (1.4826 * MAD) of the difference over the interior.
    For the object task, dark objects have class 0 and bright ones class 1;
    other tasks have a single class 0.

Embedder
    The luma image is box-resampled to 16x16, centered to zero mean and
    projected with a fixed Gaussian matrix (seeded, no bias). A constant
    image gives a zero vector, which is rejected.

Recognizer
    Ink is every pixel darker than the 90th luma percentile minus 24. Ink
    components touching the crop border and specks under 3 pixels are
    discarded. The text block gives the glyph scale s = round(h / 7) and the
    glyph count n = round((w + s) / 6s); each cell (5s x 7s at a 6s pitch) is
    block-averaged to 5x7, binarized and compared to the font. A glyph
    scores the fraction of the 35 cells agreeing with its best template;
    glyphs scoring under 0.8 are dropped. The confidence is the mean glyph
    score, 1.0 only when every glyph matches exactly.
"""

from fractions import Fraction

import numpy as np
from PIL import Image
from scipy import ndimage

from mvqa.backends.support import (
    DetectorBackend, FaceEmbedder, PlateRecognizer, clip_detections
)
from mvqa.core.errors import InvalidEmbeddingError
from mvqa.core.images import luma
from mvqa.core.types import (
    BoundingBox, DEFAULT_PLATE_ALPHABET, Detection, EmbeddingVector,
    PlateString
)

SMOOTHING_SIGMA = 1.5
DETECT_THRESHOLD = 24.0
MIN_AREA = 16
WINDOW_MARGIN = 3
INTERIOR_EROSION = 2
FULL_CONTRAST = 96.0
MAD_TO_SIGMA = 1.4826

EMBED_GRID = 16
EMBED_DIMENSION = 128
EMBED_SEED = 20240611

INK_MARGIN = 24.0
MIN_INK_COMPONENT = 3
LEGIBILITY = Fraction(4, 5)

GLYPH_WIDTH, GLYPH_HEIGHT = 5, 7

# Every glyph has ink on its first and last rows and columns, so that the
# text block bounds give the glyph grid exactly.
_FONT = {
    'A': ['01110', '10001', '10001', '11111', '10001', '10001', '10001'],
    'B': ['11110', '10001', '10001', '11110', '10001', '10001', '11110'],
    'C': ['01110', '10001', '10000', '10000', '10000', '10001', '01110'],
    'D': ['11110', '10001', '10001', '10001', '10001', '10001', '11110'],
    'E': ['11111', '10000', '10000', '11110', '10000', '10000', '11111'],
    'F': ['11111', '10000', '10000', '11110', '10000', '10000', '10000'],
    'G': ['01110', '10001', '10000', '10111', '10001', '10001', '01111'],
    'H': ['10001', '10001', '10001', '11111', '10001', '10001', '10001'],
    'I': ['11111', '00100', '00100', '00100', '00100', '00100', '11111'],
    'J': ['00111', '00010', '00010', '00010', '00010', '10010', '01100'],
    'K': ['10001', '10010', '10100', '11000', '10100', '10010', '10001'],
    'L': ['10000', '10000', '10000', '10000', '10000', '10000', '11111'],
    'M': ['10001', '11011', '10101', '10101', '10001', '10001', '10001'],
    'N': ['10001', '11001', '10101', '10011', '10001', '10001', '10001'],
    'O': ['01110', '10001', '10001', '10001', '10001', '10001', '01110'],
    'P': ['11110', '10001', '10001', '11110', '10000', '10000', '10000'],
    'Q': ['01110', '10001', '10001', '10001', '10101', '10010', '01101'],
    'R': ['11110', '10001', '10001', '11110', '10100', '10010', '10001'],
    'S': ['01111', '10000', '10000', '01110', '00001', '00001', '11110'],
    'T': ['11111', '00100', '00100', '00100', '00100', '00100', '00100'],
    'U': ['10001', '10001', '10001', '10001', '10001', '10001', '01110'],
    'V': ['10001', '10001', '10001', '10001', '10001', '01010', '00100'],
    'W': ['10001', '10001', '10001', '10101', '10101', '10101', '01010'],
    'X': ['10001', '10001', '01010', '00100', '01010', '10001', '10001'],
    'Y': ['10001', '10001', '01010', '00100', '00100', '00100', '00100'],
    'Z': ['11111', '00001', '00010', '00100', '01000', '10000', '11111'],
    '0': ['01110', '10001', '10011', '10101', '11001', '10001', '01110'],
    '1': ['00100', '01100', '10100', '00100', '00100', '00100', '11111'],
    '2': ['01110', '10001', '00001', '00010', '00100', '01000', '11111'],
    '3': ['11110', '00001', '00001', '01110', '00001', '00001', '11110'],
    '4': ['00010', '00110', '01010', '10010', '11111', '00010', '00010'],
    '5': ['11111', '10000', '11110', '00001', '00001', '10001', '01110'],
    '6': ['00110', '01000', '10000', '11110', '10001', '10001', '01110'],
    '7': ['11111', '00001', '00010', '00100', '01000', '01000', '01000'],
    '8': ['01110', '10001', '10001', '01110', '10001', '10001', '01110'],
    '9': ['01110', '10001', '10001', '01111', '00001', '00010', '01100'],
}

GLYPHS = {
    c: np.array([[bit == '1' for bit in row] for row in rows])
    for c, rows in _FONT.items()
}


def render_text_mask(text, scale=1):
    """
    Renders text in the built-in font as a boolean ink mask. Glyphs are
    5s x 7s and separated by s blank columns.

    :param str text: Characters of the font.
    :param int scale: The integer scale s.
    :rtype: np.ndarray
    """
    if len(text) == 0:
        return np.zeros((GLYPH_HEIGHT * scale, 0), dtype=bool)
    pitch = (GLYPH_WIDTH + 1) * scale
    mask = np.zeros((GLYPH_HEIGHT * scale, pitch * len(text) - scale),
                    dtype=bool)
    for i, c in enumerate(text):
        glyph = np.kron(GLYPHS[c], np.ones((scale, scale), dtype=bool))
        mask[:, i * pitch:i * pitch + GLYPH_WIDTH * scale] = glyph
    return mask


class SyntheticDetector(DetectorBackend):
    def __init__(self, task='object', threshold=DETECT_THRESHOLD,
                 min_area=MIN_AREA, full_contrast=FULL_CONTRAST):
        self._task = task
        self.threshold = threshold
        self.min_area = min_area
        self.full_contrast = full_contrast

    def name(self):
        return 'synthetic-detector'

    def task(self):
        return self._task

    def parallel_safe(self):
        return True

    def detect(self, image):
        g = luma(image)
        height, width = g.shape
        diff = g - float(np.median(g))
        smooth = ndimage.gaussian_filter(diff, SMOOTHING_SIGMA)
        mask = ndimage.binary_fill_holes(np.abs(smooth) > self.threshold)
        labels, _ = ndimage.label(mask, structure=np.ones((3, 3)))

        detections = []
        for index, sl in enumerate(ndimage.find_objects(labels), start=1):
            if sl is None:
                continue
            det = self._measure(diff, labels, index, sl)
            if det is not None:
                detections.append(det)

        return clip_detections(detections, width, height)

    def _measure(self, diff, labels, index, sl):
        height, width = diff.shape
        y0 = max(0, sl[0].start - WINDOW_MARGIN)
        y1 = min(height, sl[0].stop + WINDOW_MARGIN)
        x0 = max(0, sl[1].start - WINDOW_MARGIN)
        x1 = min(width, sl[1].stop + WINDOW_MARGIN)

        comp = labels[y0:y1, x0:x1] == index
        if comp.sum() < self.min_area:
            return None

        window = diff[y0:y1, x0:x1]
        polarity = 1.0 if np.median(window[comp]) > 0 else -1.0
        signed = polarity * window
        contrast = float(np.median(signed[comp]))
        if contrast < self.threshold:
            return None

        near = ndimage.binary_dilation(comp, iterations=WINDOW_MARGIN)
        interior = ndimage.binary_erosion(comp, iterations=INTERIOR_EROSION)
        coverage = np.where(near, np.clip(signed / contrast, 0.0, 1.0), 0.0)
        coverage[interior] = 1.0

        cy = (sl[0].start + sl[0].stop) // 2 - y0
        cx = (sl[1].start + sl[1].stop) // 2 - x0
        lo_x, hi_x = _profile_edges(coverage.sum(axis=0), cx)
        lo_y, hi_y = _profile_edges(coverage.sum(axis=1), cy)
        if not (lo_x < hi_x and lo_y < hi_y):
            return None

        if interior.any():
            values = signed[interior]
            spread = MAD_TO_SIGMA * float(
                np.median(np.abs(values - np.median(values)))
            )
        else:
            spread = 0.0
        confidence = min(1.0, contrast / self.full_contrast) * (
            contrast ** 2 / (contrast ** 2 + spread ** 2)
        )

        class_id = 0
        if self._task == 'object':
            class_id = 1 if polarity > 0 else 0

        return Detection(
            BoundingBox(x0 + lo_x, y0 + lo_y, x0 + hi_x, y0 + hi_y),
            class_id, confidence
        )


def _profile_edges(profile, center):
    """
    Reads the start and end of an object from its coverage profile. Columns
    (or rows) before the center count for their missing coverage, those after
    for their coverage.
    """
    strong = profile[profile > 0.5 * profile.max()]
    extent = float(np.median(strong))
    p = np.clip(profile / extent, 0.0, 1.0)
    lo = float(np.sum(1.0 - p[:center]))
    hi = float(center + np.sum(p[center:]))
    return lo, hi


class SyntheticEmbedder(FaceEmbedder):
    def __init__(self, dimension=EMBED_DIMENSION, seed=EMBED_SEED):
        rng = np.random.default_rng(seed)
        self._projection = rng.standard_normal(
            (dimension, EMBED_GRID * EMBED_GRID)
        ) / EMBED_GRID
        self._projection.setflags(write=False)

    def name(self):
        return 'synthetic-embedder'

    def dimension(self):
        return self._projection.shape[0]

    def parallel_safe(self):
        return True

    def embed(self, image):
        g = luma(image).astype(np.float32)
        small = Image.fromarray(g, mode='F').resize(
            (EMBED_GRID, EMBED_GRID), resample=Image.BOX
        )
        v = np.asarray(small, dtype=np.float64).ravel()
        v = v - v.mean()
        if np.max(np.abs(v)) < 1e-9:
            raise InvalidEmbeddingError('no face structure in image')
        return EmbeddingVector.from_array(self._projection @ v)


class SyntheticRecognizer(PlateRecognizer):
    def __init__(self, alphabet=DEFAULT_PLATE_ALPHABET):
        self._alphabet = ''.join(c for c in alphabet if c in GLYPHS)
        self._templates = [(c, GLYPHS[c]) for c in self._alphabet]

    def name(self):
        return 'synthetic-recognizer'

    def alphabet(self):
        return self._alphabet

    def parallel_safe(self):
        return True

    def _ink(self, g):
        ink = g < np.percentile(g, 90) - INK_MARGIN
        labels, count = ndimage.label(ink, structure=np.ones((3, 3)))
        if count == 0:
            return ink
        border = np.unique(np.concatenate([
            labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]
        ]))
        sizes = ndimage.sum(ink, labels, index=np.arange(1, count + 1))
        keep = np.zeros(count + 1, dtype=bool)
        keep[1:] = sizes >= MIN_INK_COMPONENT
        keep[border] = False
        return keep[labels]

    def _read_cell(self, cell):
        best_char, best_agree = None, -1
        for c, template in self._templates:
            agree = int(np.sum(cell == template))
            if agree > best_agree:
                best_char, best_agree = c, agree
        return best_char, Fraction(best_agree, GLYPH_WIDTH * GLYPH_HEIGHT)

    def recognize_plate(self, image):
        ink = self._ink(luma(image))
        if not ink.any():
            return PlateString('', 0.0)

        ys, xs = np.nonzero(ink)
        top, left = ys.min(), xs.min()
        h, w = ys.max() - top + 1, xs.max() - left + 1
        s = max(1, int(round(h / GLYPH_HEIGHT)))
        n = max(1, int(round((w + s) / ((GLYPH_WIDTH + 1) * s))))

        padded = np.zeros((top + GLYPH_HEIGHT * s,
                           left + (GLYPH_WIDTH + 1) * s * n), dtype=bool)
        sub = ink[:padded.shape[0], :padded.shape[1]]
        padded[:sub.shape[0], :sub.shape[1]] = sub

        chars, scores = [], []
        for i in range(n):
            cx = left + (GLYPH_WIDTH + 1) * s * i
            cell = padded[top:top + GLYPH_HEIGHT * s, cx:cx + GLYPH_WIDTH * s]
            blocks = cell.reshape(GLYPH_HEIGHT, s, GLYPH_WIDTH, s).mean(
                axis=(1, 3)
            ) >= 0.5
            c, score = self._read_cell(blocks)
            scores.append(score)
            if score >= LEGIBILITY:
                chars.append(c)

        return PlateString(''.join(chars), float(sum(scores) / len(scores)))


def detector(task='object', **options):
    return SyntheticDetector(task=task, **options)


def embedder(**options):
    return SyntheticEmbedder(**options)


def recognizer(**options):
    return SyntheticRecognizer(**options)
