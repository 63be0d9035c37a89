import time
from multiprocessing import cpu_count

from mvqa.tools.parallel_tools import effective_jobs, keepalive, parallel_map


def square(x):
    return x * x


def square_unless_three(x):
    if x == 3:
        raise RuntimeError('three')
    return x * x


def slow_when_negative(x):
    keepalive(0.5, timeout_cause=x)
    if x < 0:
        time.sleep(30)
    return x


def test_inline():
    assert parallel_map(1, square, range(5)) == [0, 1, 4, 9, 16]
    assert parallel_map(4, square, [7]) == [49]
    assert parallel_map(4, square, []) == []


def test_results_keep_the_order():
    assert parallel_map(3, square, range(10)) == [x * x for x in range(10)]


def test_failures_give_none():
    assert parallel_map(2, square_unless_three, range(5)) == \
        [0, 1, 4, None, 16]


def test_timeouts():
    causes = []
    res = parallel_map(2, slow_when_negative, [1, -2, 3],
                       timeout_callback=causes.append)
    assert res == [1, None, 3]
    assert causes == [-2]


def test_effective_jobs():
    assert effective_jobs(0) == cpu_count()
    assert effective_jobs(-1) == cpu_count()
    assert effective_jobs(3) == 3
