import importlib

from mvqa.metrics.support import MetricPlugin
from mvqa.tools import logger

BUILT_IN_METRICS_FORMAT = 'mvqa.metrics.{}'


def import_metric(module_path):
    """
    Tries to import the metric defined in the given module path. If the exact
    path does not resolve to a python module, a second attempt is done
    assuming that the given module path is actually the name of one of the
    built-in metrics.

    :param str module_path: path to the python module containing the metric.
    :raise ImportError: when the module could not be imported.
    """
    try:
        return importlib.import_module(module_path)
    except ImportError:
        return importlib.import_module(
            BUILT_IN_METRICS_FORMAT.format(module_path)
        )


def load_metrics(specs):
    """
    Loads the metrics described by (module path, options) pairs. Errors are
    logged; a boolean tells whether every metric could be loaded.

    :param list[(str, dict)] specs: The metrics to load.
    :rtype: (list[MetricPlugin], bool)
    """
    metrics = []
    for module_path, options in specs:
        try:
            module = import_metric(module_path)
        except ImportError:
            logger.log('error', 'failed to import metric module {}'.format(
                module_path
            ))
            continue

        plugin = getattr(module, 'metric', None)
        if plugin is None:
            logger.log('error', 'metric {} does not export a "metric" '
                                'class'.format(module_path))
        elif not (isinstance(plugin, type) and
                  issubclass(plugin, MetricPlugin)):
            logger.log('error', 'metric {} does not inherit the '
                                '"mvqa.metrics.support.MetricPlugin" '
                                'interface'.format(module_path))
        else:
            metrics.append(plugin.create(**(options or {})))

    return metrics, len(metrics) == len(specs)


def metric_specs_from_file(path):
    """
    Reads a metric list: one module path per line, blank lines and lines
    starting with '#' ignored.

    :param str path: The file.
    :rtype: list[(str, dict)]
    """
    with open(path, encoding='utf-8') as f:
        return [
            (line.strip(), {})
            for line in f
            if line.strip() and not line.strip().startswith('#')
        ]
