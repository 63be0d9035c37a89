import importlib

from mvqa.core.errors import BackendError

BUILT_IN_BACKENDS_FORMAT = 'mvqa.backends.{}'


def import_backend(module_path):
    """
    Tries to import the backend defined in the given module path. If the
    exact path does not resolve to a python module, a second attempt is done
    assuming that the given module path is actually the name of one of the
    built-in backends.

    :param str module_path: path to the python module containing the backend.
    :raise ImportError: when the module could not be imported.
    """
    try:
        return importlib.import_module(module_path)
    except ImportError:
        return importlib.import_module(
            BUILT_IN_BACKENDS_FORMAT.format(module_path)
        )


def create_backend(role, module_path, options=None):
    """
    Instantiates a backend through the factory of the given role exported by
    the backend module.

    :param str role: 'detector', 'embedder' or 'recognizer'.
    :param str module_path: The backend module.
    :param dict | None options: Keyword arguments of the factory.
    :raise BackendError: if the module cannot be imported or lacks the
        factory.
    """
    try:
        module = import_backend(module_path)
    except ImportError as e:
        raise BackendError(
            'cannot import backend {}: {}'.format(module_path, e)
        ) from e

    factory = getattr(module, role, None)
    if factory is None:
        raise BackendError('backend {} does not export a "{}" factory'.format(
            module_path, role
        ))
    return factory(**(options or {}))
