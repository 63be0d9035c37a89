"""
Rank and linear correlation between two series. A series with no variation
has no defined correlation: both functions return None for it.
"""

import math

import numpy as np
from scipy.stats import rankdata

from mvqa.tools import logger

MIN_LENGTH = 3


def _check(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError('series must be 1-d and of equal length, got {} '
                         'and {}'.format(x.shape, y.shape))
    if len(x) < MIN_LENGTH:
        raise ValueError('correlation needs at least {} values, got {}'
                         .format(MIN_LENGTH, len(x)))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError('series contain non-finite values')
    return x, y


def _pearson(x, y):
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def plcc(x, y):
    """
    Returns the Pearson linear correlation coefficient.

    :param list[float] x: The first series.
    :param list[float] y: The second series, of the same length (>= 3).
    :rtype: float | None
    """
    res = _pearson(*_check(x, y))
    if res is None:
        logger.log('warning', 'PLCC undefined on a constant series')
    return res


def srcc(x, y):
    """
    Returns the Spearman rank correlation coefficient: tied values get their
    average rank, then the ranks are correlated linearly.

    :param list[float] x: The first series.
    :param list[float] y: The second series, of the same length (>= 3).
    :rtype: float | None
    """
    x, y = _check(x, y)
    res = _pearson(rankdata(x), rankdata(y))
    if res is None:
        logger.log('warning', 'SRCC undefined on a constant series')
    return res
