"""
Run configuration: a YAML file whose string values may reference
environment variables. Command-line flags override the file.
"""

import hashlib
import json
import os

import yaml

from mvqa.core.errors import ConfigError
from mvqa.dataset.codecs import codec_from_config
from mvqa.dataset.labeling import (
    DEFAULT_CONF_THRESHOLD, DEFAULT_DEDUP_DISTANCE, DEFAULT_MIN_GAP,
    DEFAULT_PADDING
)
from mvqa.targets.detection import DEFAULT_MATCH_THRESHOLD
from mvqa.training.targets import DEFAULT_MIN_CONFIDENCE

OUTPUT_ROOT_VAR = 'MVQA_OUTPUT_ROOT'

TASKS = ('object', 'face', 'plate', 'face_recognition')

SECTIONS = ('task', 'seed', 'jobs', 'output_root', 'run_id', 'corpus',
            'codecs', 'calibration', 'backends', 'label', 'targets',
            'train', 'eval')

DEFAULT_TARGETS = {
    'object': 'delta_object_iou',
    'face': 'delta_object_iou',
    'plate': 'delta_object_iou',
    'face_recognition': 'face_delta',
}

_LABEL_DEFAULTS = {
    'autolabel': None,
    'conf_threshold': DEFAULT_CONF_THRESHOLD,
    'min_gap': DEFAULT_MIN_GAP,
    'dedup': True,
    'dedup_distance': DEFAULT_DEDUP_DISTANCE,
    'split_fractions': [0.8, 0.2],
}

_TARGETS_DEFAULTS = {
    'match_threshold': DEFAULT_MATCH_THRESHOLD,
    'class_aware': True,
    'min_confidence': DEFAULT_MIN_CONFIDENCE,
}

_EVAL_DEFAULTS = {
    'target': None,
    'pooling': 'object',
    'padding': DEFAULT_PADDING,
    'splits': ['val', 'test'],
    'metrics': None,
    'models': True,
    'backend_timing': True,
}


def expand_env(value):
    """
    Expands $VAR and ${VAR} in every string of a configuration tree.
    """
    if isinstance(value, str):
        return os.path.expandvars(value)
    if isinstance(value, dict):
        return {k: expand_env(v) for k, v in value.items()}
    if isinstance(value, list):
        return [expand_env(v) for v in value]
    return value


def _section(data, name, defaults):
    section = data.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError('section {} must be a mapping'.format(name))
    unknown = sorted(set(section) - set(defaults))
    if unknown:
        raise ConfigError('unknown keys in section {}: {}'.format(
            name, ', '.join(unknown)
        ))
    res = dict(defaults)
    res.update(section)
    return res


class RunConfig(object):
    """
    A validated run configuration. Two configurations are equal when their
    content is, which lets pipeline tasks be compared by value.
    """
    def __init__(self, data, base_dir='.'):
        """
        :param dict data: The parsed configuration.
        :param str base_dir: The directory relative paths start from.
        """
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError('unknown configuration keys: {}'.format(
                ', '.join(unknown)
            ))

        self.data = data
        self.base_dir = os.path.abspath(base_dir)
        self.task = data.get('task')
        if self.task not in TASKS:
            raise ConfigError('task must be one of {}, got {!r}'.format(
                ', '.join(TASKS), self.task
            ))
        try:
            self.seed = int(data.get('seed', 0))
            self.jobs = int(data.get('jobs', 1))
        except (TypeError, ValueError) as e:
            raise ConfigError('seed and jobs must be integers: {}'.format(e))

        self.output_root = self._path(data.get('output_root', 'runs'))
        self.run_id = str(data.get('run_id', '{}-{}'.format(self.task,
                                                            self.seed)))
        self.corpus = self._corpus(data.get('corpus'))
        self.codecs = self._codecs(data.get('codecs'))
        self.calibration = data.get('calibration')
        self.backends = self._backends(data.get('backends'))
        self.label = _section(data, 'label', _LABEL_DEFAULTS)
        self.targets = _section(data, 'targets', _TARGETS_DEFAULTS)
        self.train = self._train(data.get('train'))
        self.eval = _section(data, 'eval', _EVAL_DEFAULTS)
        if self.eval['target'] is None:
            self.eval['target'] = self.train['models'][0]['target']
        if isinstance(self.eval['metrics'], str):
            self.eval['metrics'] = self._path(self.eval['metrics'])

    def _path(self, path):
        return os.path.normpath(os.path.join(self.base_dir, str(path)))

    def _corpus(self, corpus):
        if not isinstance(corpus, dict) or len(corpus) != 1:
            raise ConfigError('corpus needs exactly one of "synthetic", '
                              '"paths" or "paths_from"')
        kind, value = next(iter(corpus.items()))
        if kind == 'synthetic':
            value = dict(value or {})
            value.setdefault('count', 20)
            value.setdefault('images_per_person', 3)
            return {'synthetic': value}
        if kind == 'paths':
            return {'paths': [self._path(p) for p in value]}
        if kind == 'paths_from':
            path = self._path(value)
            try:
                with open(path, encoding='utf-8') as f:
                    lines = [l.strip() for l in f if l.strip()]
            except OSError as e:
                raise ConfigError('cannot read corpus list {}: {}'.format(
                    path, e
                ))
            base = os.path.dirname(path)
            return {'paths': [os.path.normpath(os.path.join(base, l))
                              for l in lines]}
        raise ConfigError('unknown corpus kind {!r}'.format(kind))

    @staticmethod
    def _codecs(sections):
        sections = sections or [{'name': 'jpeg'}]
        try:
            codecs = [codec_from_config(s) for s in sections]
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('invalid codec section: {}'.format(e))
        names = [c.name for c in codecs]
        if 'jpeg' not in names:
            raise ConfigError('the jpeg codec is mandatory')
        if len(set(names)) != len(names):
            raise ConfigError('duplicate codec in {}'.format(names))
        return codecs

    def _backends(self, section):
        if section is None:
            if self.is_synthetic:
                section = {role: {'module': 'synthetic'}
                           for role in ('detector', 'embedder', 'recognizer')}
            else:
                section = {}
        if not isinstance(section, dict):
            raise ConfigError('section backends must be a mapping')
        res = {}
        for role, value in sorted(section.items()):
            if role not in ('detector', 'embedder', 'recognizer'):
                raise ConfigError('unknown backend role {!r}'.format(role))
            if isinstance(value, str):
                value = {'module': value}
            if not isinstance(value, dict) or 'module' not in value:
                raise ConfigError('backend {} needs a module'.format(role))
            options = dict(value.get('options') or {})
            if role == 'detector' and value['module'] == 'synthetic':
                options.setdefault(
                    'task', 'face' if self.task == 'face_recognition'
                    else self.task
                )
            res[role] = {'module': value['module'], 'options': options}
        return res

    def _train(self, section):
        section = dict(section or {})
        models = section.pop('models', None) or [
            {'name': 'model', 'target': DEFAULT_TARGETS[self.task]}
        ]
        pool = [self._path(p) for p in section.pop('pool', None) or []]
        if section:
            raise ConfigError('unknown keys in section train: {}'.format(
                ', '.join(sorted(section))
            ))
        names = []
        for m in models:
            if 'name' not in m or 'target' not in m:
                raise ConfigError('every model needs a name and a target')
            names.append(m['name'])
        if len(set(names)) != len(names):
            raise ConfigError('duplicate model names: {}'.format(names))
        return {'models': models, 'pool': pool}

    @property
    def is_synthetic(self):
        return 'synthetic' in self.corpus

    @property
    def run_dir(self):
        return os.path.join(self.output_root, self.run_id)

    def digest(self):
        return hashlib.sha256(json.dumps(
            [self.data, self.base_dir, self.output_root, self.seed,
             self.jobs], sort_keys=True, default=str
        ).encode('utf-8')).hexdigest()

    def __eq__(self, other):
        return isinstance(other, RunConfig) and \
            self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())

    def __repr__(self):
        return 'RunConfig(task={}, run_id={})'.format(self.task, self.run_id)


def load_config(path, seed=None, jobs=None, out=None):
    """
    Reads a run configuration. The output root is taken, by increasing
    priority, from the file, the MVQA_OUTPUT_ROOT environment variable and
    the `out` argument.

    :param str path: The YAML file.
    :param int | None seed: Overrides the seed.
    :param int | None jobs: Overrides the number of jobs.
    :param str | None out: Overrides the output root.
    :rtype: RunConfig
    :raise ConfigError: if the file cannot be read or is invalid.
    """
    try:
        with open(path, encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError('cannot read configuration {}: {}'.format(path, e))
    except yaml.YAMLError as e:
        raise ConfigError('invalid YAML in {}: {}'.format(path, e))
    if not isinstance(data, dict):
        raise ConfigError('configuration {} is not a mapping'.format(path))

    data = expand_env(data)
    if os.environ.get(OUTPUT_ROOT_VAR):
        data['output_root'] = os.path.abspath(os.environ[OUTPUT_ROOT_VAR])
    if out is not None:
        out = os.path.abspath(out)
    for key, value in (('seed', seed), ('jobs', jobs), ('output_root', out)):
        if value is not None:
            data[key] = value

    return RunConfig(data, os.path.dirname(os.path.abspath(path)))
