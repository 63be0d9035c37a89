"""
Atomic file output: content is written to a temporary file in the target
directory, then renamed over the destination.
"""

import csv
import io
import json
import os
import tempfile
from contextlib import contextmanager


@contextmanager
def atomic_open(path, mode='w', newline=None):
    """
    Opens a temporary file next to the given path. On a clean exit it replaces
    the path; on an exception it is removed and the path is left untouched.

    :param str path: The destination file.
    :param str mode: 'w' or 'wb'.
    :param str | None newline: Passed to open() in text mode.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        dir=directory, prefix='.{}.'.format(os.path.basename(path)),
        suffix='.tmp'
    )
    try:
        kwargs = {} if 'b' in mode else {'encoding': 'utf-8',
                                         'newline': newline}
        with io.open(fd, mode, **kwargs) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def dumps_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def write_json(path, obj):
    with atomic_open(path) as f:
        f.write(dumps_json(obj))


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def write_jsonl(path, records):
    """
    :param str path: The destination.
    :param iterable[dict] records: One JSON object per line, keys sorted.
    """
    with atomic_open(path) as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True,
                               separators=(',', ':')))
            f.write('\n')


def read_jsonl(path):
    """
    :param str path: The JSON Lines file.
    :rtype: list[dict]
    """
    with open(path, encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path, header, rows):
    with atomic_open(path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
