import os
import queue
import time
import traceback
from multiprocessing import Manager, Process, cpu_count

from mvqa.tools import logger

# The environment variables that are tried by the tempfile package to decide
# where to create its temporary files/directories.
_tmpdir_env_vars = ['TMPDIR', 'TEMP', 'TMP']

_keep_alive_fun = None


def _remove_tmpdir_env_vars():
    """
    Removes from the environment the variables designating directories which
    the tempfile package uses to decide where to store its temporary files.
    Long paths there break the AF_UNIX sockets of the multiprocessing
    manager (108 characters at most).
    """
    for env_var in _tmpdir_env_vars:
        if env_var in os.environ:
            del os.environ[env_var]


def effective_jobs(jobs):
    """
    Maps the --jobs convention to a process count: 0 or less means one
    process per CPU.

    :param int jobs: The requested number of jobs.
    :rtype: int
    """
    return cpu_count() if jobs <= 0 else jobs


def keepalive(seconds, timeout_cause=None):
    """
    Tells the process driver that this worker has not yet timed out and must
    stay alive for at least the given number of seconds. The cause is handed
    to the timeout callback if the worker times out anyway.

    Does nothing when called outside of a worker process.

    :param float seconds: The minimal number of seconds that this process
        should stay alive before timing out. A negative amount indicates that
        this process should never timeout.
    :param object timeout_cause: An object representing the cause of the
        timeout.
    """
    if _keep_alive_fun is not None:
        _keep_alive_fun(seconds, timeout_cause)


def _target_proxy(target, index, arg, result_queue, timeout_queue,
                  timeout_factor):
    def keepalive_fun(x, timeout_cause=None):
        timeout_queue.put((timeout_factor * x, timeout_cause))

    global _keep_alive_fun
    _keep_alive_fun = keepalive_fun

    try:
        result_queue.put((index, target(arg)))
    except Exception:
        with logger.log_stdout('internal-error'):
            traceback.print_exc()
        raise


class TimedProcess(object):
    """
    Wraps a worker process that can time out.

    The worker communicates (delta, cause) pairs through its timeout queue
    (see keepalive). The latest pair wins: the worker times out if no new pair
    arrives within delta seconds.
    """
    def __init__(self, timeout_queue, index, process, timeout):
        self.timeout_queue = timeout_queue
        self.index = index
        self.process = process
        self.last_update = time.time()
        self.timeout_info = (timeout, None)

    def start(self):
        self.process.start()

    def terminate(self):
        self.process.terminate()

    def is_alive(self):
        return self.process.is_alive()

    def check_timeout_and_get_cause(self):
        """
        Returns a pair which first element is True iff this process has timed
        out according to the timeout information it provided. If it is the
        case, the second element represents the cause of the timeout.

        :rtype: (bool, object)
        """
        try:
            while True:
                self.timeout_info = self.timeout_queue.get_nowait()
                self.last_update = time.time()
        except queue.Empty:
            pass

        timeout_delta, timeout_cause = self.timeout_info
        if timeout_delta >= 0:
            if time.time() - self.last_update > timeout_delta:
                self.timeout_info = (-1, None)
                return True, timeout_cause

        return False, None


def parallel_map(process_count, target, elements, timeout_factor=1.0,
                 timeout_callback=None, initial_timeout=-1, poll_interval=0.1):
    """
    Maps the target function over the elements using several processes.

    Results come back in the order of the elements. An element whose worker
    raised or timed out yields None.

    With a process count of 1 everything runs in the calling process and the
    timeout mechanism is disabled.

    :param int process_count: The maximal number of processes to use
        simultaneously.
    :param (object)->object target: The mapping function. Must be picklable.
    :param iterable[object] elements: The elements to map.
    :param float timeout_factor: The factor to multiply processes' timeout
        deltas with.
    :param (object)->None | None timeout_callback: The function to call
        if a process times out. It is called with the cause of the timeout.
    :param float initial_timeout: The timeout of a worker before it first
        calls keepalive. Negative means never.
    :param float poll_interval: Seconds between two checks of the workers.
    :rtype: list[object]
    """
    elements = list(elements)

    if process_count <= 1 or len(elements) <= 1:
        return [target(e) for e in elements]

    _remove_tmpdir_env_vars()

    m = Manager()
    result_queue = m.Queue()
    todo = list(enumerate(elements))
    processes = []

    def refill_workers():
        while len(processes) < process_count and todo:
            index, elem = todo.pop(0)
            timeout_queue = m.Queue()
            proc = TimedProcess(timeout_queue, index, Process(
                target=_target_proxy,
                args=(target, index, elem, result_queue, timeout_queue,
                      timeout_factor)
            ), initial_timeout)
            processes.append(proc)
            proc.start()

    def handle_timedout_processes():
        for proc in processes:
            has_timed_out, timeout_cause = proc.check_timeout_and_get_cause()
            if has_timed_out:
                proc.terminate()
                if timeout_callback:
                    timeout_callback(timeout_cause)

    refill_workers()

    while processes:
        time.sleep(poll_interval)
        handle_timedout_processes()
        processes = [p for p in processes if p.is_alive()]
        refill_workers()

    results = [None] * len(elements)
    try:
        while True:
            index, res = result_queue.get_nowait()
            results[index] = res
    except queue.Empty:
        pass

    try:
        m.shutdown()
    except OSError:
        pass  # the OS reclaims the manager process

    return results
