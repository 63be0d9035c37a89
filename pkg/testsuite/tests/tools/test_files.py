import os

import pytest

from mvqa.tools.files import (
    atomic_open, read_json, read_jsonl, write_csv, write_json, write_jsonl
)


def test_atomic_open_replaces(tmp_path):
    path = str(tmp_path / 'sub' / 'out.txt')
    with atomic_open(path) as f:
        f.write('first')
    with atomic_open(path) as f:
        f.write('second')
    with open(path, encoding='utf-8') as f:
        assert f.read() == 'second'
    assert os.listdir(str(tmp_path / 'sub')) == ['out.txt']


def test_atomic_open_keeps_old_content_on_error(tmp_path):
    path = str(tmp_path / 'out.txt')
    write_json(path, {'a': 1})
    with pytest.raises(RuntimeError):
        with atomic_open(path) as f:
            f.write('partial')
            raise RuntimeError('interrupted')
    assert read_json(path) == {'a': 1}
    assert os.listdir(str(tmp_path)) == ['out.txt']


def test_json_lines(tmp_path):
    path = str(tmp_path / 'm.jsonl')
    write_jsonl(path, [{'b': 1, 'a': [1, 2]}, {'c': None}])
    with open(path, encoding='utf-8') as f:
        assert f.read() == '{"a":[1,2],"b":1}\n{"c":null}\n'
    assert read_jsonl(path) == [{'a': [1, 2], 'b': 1}, {'c': None}]


def test_csv(tmp_path):
    path = str(tmp_path / 't.csv')
    write_csv(path, ('x', 'y'), [[1, 'a,b'], [2, '']])
    with open(path, encoding='utf-8') as f:
        assert f.read() == 'x,y\n1,"a,b"\n2,\n'
