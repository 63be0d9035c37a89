"""
Balances the quality grid of a codec so that the PSNR distribution of its
variants matches a target distribution, usually the one of a reference
codec.
"""

import os
import tempfile
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.stats import wasserstein_distance

from mvqa.dataset.codecs import compute_psnr, encode_variant
from mvqa.tools import logger

MAX_ROUNDS = 20


@dataclass(frozen=True)
class PsnrHistogram(object):
    centers: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        if len(self.centers) == 0 or len(self.centers) != len(self.weights):
            raise ValueError('histogram needs as many weights as centers')
        if sum(self.weights) <= 0 or min(self.weights) < 0:
            raise ValueError('histogram weights must be >= 0, not all 0')

    @staticmethod
    def from_samples(samples, bin_width=None):
        """
        Builds a histogram from PSNR measures. Without a bin width every
        distinct value is its own bin.

        :param list[float] samples: The measures.
        :param float | None bin_width: The bin width in dB.
        :rtype: PsnrHistogram
        """
        samples = np.asarray(samples, dtype=np.float64)
        if bin_width is not None:
            samples = (np.floor(samples / bin_width) + 0.5) * bin_width
        centers, counts = np.unique(samples, return_counts=True)
        return PsnrHistogram(tuple(float(c) for c in centers),
                             tuple(float(c) for c in counts))

    def distance(self, samples):
        """
        Returns the earth mover's distance between the given measures and
        this histogram.

        :param list[float] samples: The measures.
        :rtype: float
        """
        return float(wasserstein_distance(samples, self.centers,
                                          v_weights=self.weights))


class PsnrMeasure(object):
    """
    Measures, and caches, the PSNR of every corpus image encoded at a quality
    factor.
    """
    def __init__(self, corpus, codec, work_dir):
        self.corpus = list(corpus)
        self.codec = codec
        self.work_dir = work_dir
        self.cache = {}

    def __call__(self, index, qf):
        key = (index, qf)
        if key not in self.cache:
            path = os.path.join(self.work_dir, '{}_{}_{}.{}'.format(
                index, self.codec.name, qf, self.codec.extension
            ))
            variant = encode_variant(self.corpus[index], self.codec, qf, path)
            self.cache[key] = compute_psnr(self.corpus[index], variant)
        return self.cache[key]


def measured_histogram(corpus, codec, measure=None):
    """
    Returns the PSNR histogram of a codec at its own grid.

    :rtype: PsnrHistogram
    """
    with tempfile.TemporaryDirectory() as tmp:
        measure = measure or PsnrMeasure(corpus, codec, tmp)
        return PsnrHistogram.from_samples([
            measure(i, qf)
            for i in range(len(corpus))
            for qf in codec.grid
        ])


def calibrate_quality_grid(corpus, codec, target, grid_size=None,
                           measure=None):
    """
    Searches a quality grid whose PSNR distribution over the corpus is as
    close as possible to the target, by coordinate descent over the codec's
    integer quality range starting from its configured grid. A move is only
    taken if it strictly lowers the distance, so a grid already at a local
    optimum is returned unchanged.

    :param list[ImageRef] corpus: A non-empty sample of source images.
    :param CodecSpec codec: The codec to calibrate.
    :param PsnrHistogram target: The distribution to reach.
    :param int | None grid_size: The number of quality factors. Defaults to
        the size of the codec's grid.
    :param (int, int)->float | None measure: Returns the PSNR of corpus image
        i at quality qf. Defaults to encoding with the codec.
    :rtype: tuple[int]
    """
    corpus = list(corpus)
    if len(corpus) == 0:
        raise ValueError('calibration needs a non-empty corpus')

    with tempfile.TemporaryDirectory() as tmp:
        measure = measure or PsnrMeasure(corpus, codec, tmp)
        return _descend(corpus, codec, target, grid_size, measure)


def _descend(corpus, codec, target, grid_size, measure):
    lo, hi = codec.quality_range
    candidates = range(lo, hi + 1)
    grid = list(codec.grid)
    if grid_size is not None and grid_size != len(grid):
        grid = [int(round(q)) for q in np.linspace(lo, hi, grid_size)]

    def samples(g):
        return [measure(i, qf) for i in range(len(corpus)) for qf in g]

    best = target.distance(samples(grid))

    for _ in range(MAX_ROUNDS):
        improved = False
        for k in range(len(grid)):
            for qf in candidates:
                if qf in grid:
                    continue
                trial = grid[:k] + [qf] + grid[k + 1:]
                dist = target.distance(samples(trial))
                if dist < best:
                    grid, best, improved = trial, dist, True
        if not improved:
            break

    _warn_unreachable(corpus, target, measure, lo, hi)
    grid = tuple(sorted(grid))
    logger.log('info', 'calibrated quality grid', codec=codec.name,
               grid=list(grid), distance=round(best, 6))
    return grid


def _warn_unreachable(corpus, target, measure, lo, hi):
    floor = min(measure(i, lo) for i in range(len(corpus)))
    ceiling = max(measure(i, hi) for i in range(len(corpus)))
    for center, weight in zip(target.centers, target.weights):
        if weight > 0 and not (floor <= center <= ceiling):
            logger.log('warning', 'target PSNR bin is out of reach of codec',
                       bin_db=center, reachable='{:.2f}..{:.2f}'.format(
                           floor, ceiling))
