"""
Brute-force reference implementations, and the OracleTest class which checks
an implementation against one of them over seeded random instances.
"""

import itertools
import math

import numpy as np


class OracleTest(object):
    """
    Abstract test class. Can be inherited to compare an implementation with
    an independent, slower computation of the same function.
    """
    def __init__(self, count=1000, seed=0, tolerance=1e-12, debug=False):
        self.count = count
        self.seed = seed
        self.tolerance = tolerance
        self.debug = debug

    def instances(self, rng):
        """
        Yields argument tuples.

        :param np.random.Generator rng: The random source.
        """
        raise NotImplementedError

    def concrete(self, *args):
        raise NotImplementedError

    def implementation(self, *args):
        raise NotImplementedError

    def agree(self, expected, actual):
        if expected is None or actual is None:
            return expected is None and actual is None
        return abs(expected - actual) <= self.tolerance

    def run(self):
        rng = np.random.default_rng(self.seed)
        checked = 0
        for args in itertools.islice(self.instances(rng), self.count):
            expected = self.concrete(*args)
            actual = self.implementation(*args)
            if self.debug:
                print(args, expected, actual)
            assert self.agree(expected, actual), \
                '{!r}: expected {!r}, got {!r}'.format(args, expected, actual)
            checked += 1
        assert checked == self.count


def raster_iou(a, b):
    """
    IoU of two boxes with integer coordinates, by counting pixels.
    """
    def pixels(box):
        return {
            (x, y)
            for x in range(int(box.x_min), int(box.x_max))
            for y in range(int(box.y_min), int(box.y_max))
        }
    pa, pb = pixels(a), pixels(b)
    return len(pa & pb) / len(pa | pb)


def optimal_matched_sum(gt, det, threshold, iou):
    """
    The largest sum of IoUs over every injective matching whose pairs all
    reach the threshold.
    """
    best = 0.0
    n = len(gt)
    for k in range(0, min(n, len(det)) + 1):
        for gts in itertools.combinations(range(n), k):
            for dets in itertools.permutations(range(len(det)), k):
                values = [iou(gt[g].box, det[d].box)
                          for g, d in zip(gts, dets)]
                if all(v >= threshold for v in values):
                    best = max(best, sum(values))
    return best


def textbook_jaro(s1, s2):
    """
    The Jaro similarity as usually written down: characters of s1 are taken
    left to right, each matching the first free equal character of s2 within
    the window. The result depends on which string comes first; callers
    choose the orientation.
    """
    if not s1 or not s2:
        return 0.0
    window = max(0, max(len(s1), len(s2)) // 2 - 1)
    taken = set()
    pairs = []
    for i, a in enumerate(s1):
        for j, b in enumerate(s2):
            if j not in taken and a == b and abs(i - j) <= window:
                taken.add(j)
                pairs.append((i, j))
                break
    m = len(pairs)
    if m == 0:
        return 0.0
    in_s1 = [s1[i] for i, _ in pairs]
    in_s2 = [s2[j] for j in sorted(taken)]
    half_t = sum(1 for a, b in zip(in_s1, in_s2) if a != b) / 2.0
    return (m / len(s1) + m / len(s2) + (m - half_t) / m) / 3.0


def textbook_jaro_both(s1, s2):
    """
    Returns the textbook Jaro similarity with s1 first, then with s2 first.
    """
    return textbook_jaro(s1, s2), textbook_jaro(s2, s1)


def dp_levenshtein(s1, s2):
    previous = list(range(len(s2) + 1))
    for i, a in enumerate(s1, start=1):
        current = [i]
        for j, b in enumerate(s2, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1,
                               previous[j - 1] + (a != b)))
        previous = current
    return previous[-1]


def naive_ranks(values):
    """
    Average 1-based ranks, ties sharing the mean of their positions.
    """
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def naive_pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def naive_spearman(x, y):
    return naive_pearson(naive_ranks(x), naive_ranks(y))
