import hashlib
import time
from collections import defaultdict
from contextlib import contextmanager


class Bunch(dict):
    """
    Represents a bunch of data. Unlike a standard dict, the attribute notation
    can be used to get keys. Once constructed, the object is immutable.
    """
    def __init__(self, **kw):
        dict.__init__(self, kw)
        kw['_hash'] = hash(tuple(sorted(kw.keys())))
        self.__dict__.update(kw)

    def __setattr__(self, key, value):
        raise TypeError("Bunch does not support assignment")

    def __setitem__(self, key, value):
        raise TypeError("Bunch does not support assignment")

    def __hash__(self):
        return self._hash


class KeyCounter(object):
    """
    A dict which provides facilities for counting keys.
    """
    def __init__(self):
        self.dict = defaultdict(lambda: 0)

    def incr(self, item, amount=1):
        self.dict[item] += amount

    def update(self, other):
        """
        Adds the counts of another counter to this one.

        :param KeyCounter other: The counter to merge.
        """
        for key, count in other.items():
            self.dict[key] += count

    def items(self):
        return sorted(self.dict.items())

    def as_dict(self):
        return dict(self.items())

    def __getitem__(self, item):
        return self.dict[item]


def mean_or_none(values):
    """
    Returns the arithmetic mean of the given values, or None if there are
    none.

    :param list[float] values: The values to average.
    :rtype: float | None
    """
    values = list(values)
    if len(values) == 0:
        return None
    return sum(values) / len(values)


def valueclass(cls):
    """
    Gives structural equality, hashing and repr to a class from the
    attributes set by its constructor. Used for scheduler tasks and
    requirements, which are compared by value.
    """
    def new_eq(self, other):
        return isinstance(other, self.__class__) and vars(self) == vars(other)

    def new_hash(self):
        return hash(tuple(vars(self).values()))

    def new_repr(self):
        return "{}({})".format(
            self.__class__.__name__,
            ", ".join("{}={!r}".format(k, v) for k, v in vars(self).items())
        )

    cls.__eq__ = new_eq
    cls.__hash__ = new_hash
    cls.__repr__ = new_repr

    return cls


def stable_seed(*parts):
    """
    Derives a 32-bit seed from the given parts, independently of the
    interpreter's hash randomization.

    :param *object parts: Anything with a stable str() representation.
    :rtype: int
    """
    digest = hashlib.sha256(
        '\x1f'.join(str(p) for p in parts).encode('utf-8')
    ).digest()
    return int.from_bytes(digest[:4], 'little')


def sha256_of_file(path):
    """
    :param str path: The file to digest.
    :rtype: str
    """
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


class StopWatch(object):
    """
    Accumulates wall-clock durations under names.
    """
    def __init__(self):
        self.timings = defaultdict(float)
        self.counts = defaultdict(int)

    @contextmanager
    def measure(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += time.perf_counter() - start
            self.counts[name] += 1

    def per_call(self, name):
        """
        :param str name: The measured name.
        :rtype: float | None
        """
        if self.counts[name] == 0:
            return None
        return self.timings[name] / self.counts[name]

    def as_dict(self):
        return {k: round(v, 6) for k, v in sorted(self.timings.items())}
