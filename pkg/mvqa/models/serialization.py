"""
Self-describing model files: the state dict travels with the schema
version, kind, task and configuration needed to rebuild the model.
"""

import torch

from mvqa.core.errors import ModelConfigError, SchemaVersionError
from mvqa.models.networks import build_model
from mvqa.tools.files import atomic_open

MODEL_SCHEMA_VERSION = 1


def save_model(model, path):
    """
    :param QualityModel model: The model.
    :param str path: The destination file, written atomically.
    """
    container = {
        'schema_version': MODEL_SCHEMA_VERSION,
        'kind': model.kind,
        'task': model.task,
        'target': model.target,
        'config': model.config(),
        'state_dict': {k: v.detach().cpu()
                       for k, v in model.state_dict().items()},
    }
    with atomic_open(path, 'wb') as f:
        torch.save(container, f)


def load_model(path, kind=None, task=None, config=None):
    """
    Loads a model, checking it against what the caller expects.

    :param str path: The model file.
    :param str | None kind: The expected kind.
    :param str | None task: The expected task.
    :param dict | None config: Expected configuration values.
    :rtype: QualityModel
    :raise ModelConfigError: naming the first value that differs.
    :raise SchemaVersionError: if the file has another schema version.
    """
    container = torch.load(path, map_location='cpu', weights_only=True)
    found = container.get('schema_version')
    if found != MODEL_SCHEMA_VERSION:
        raise SchemaVersionError(path, MODEL_SCHEMA_VERSION, found)

    if kind is not None and container['kind'] != kind:
        raise ModelConfigError('kind', kind, container['kind'])
    if task is not None and container['task'] != task:
        raise ModelConfigError('task', task, container['task'])
    for key, expected in sorted((config or {}).items()):
        actual = container['config'].get(key)
        if isinstance(expected, tuple):
            expected = list(expected)
        if actual != expected:
            raise ModelConfigError(key, expected, actual)

    model = build_model(container['kind'], container['task'],
                        container['config'])
    model.target = container.get('target')
    model.load_state_dict(container['state_dict'])
    model.eval()
    return model
