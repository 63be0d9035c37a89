import argparse
import os
import sys
import traceback

from mvqa.config import load_config
from mvqa.core.errors import (
    BackendError, ConfigError, EncoderError, ModelConfigError,
    SchemaVersionError, StageError, TrainingDivergedError
)
from mvqa.stages import STAGE_FUNCTIONS, STAGES, RunReport
from mvqa.tools import logger
from mvqa.tools.digraph import Digraph
from mvqa.tools.dot_printer import DataPrinter, gen_dot
from mvqa.tools.scheduler import Scheduler

EXIT_SUCCESS = 0
EXIT_STAGE_FAILURE = 1
EXIT_CONFIG_ERROR = 2

DEFAULT_LOG = 'progress;warning;error;internal-error'

STAGE_ERRORS = (StageError, BackendError, EncoderError, SchemaVersionError,
                ModelConfigError, TrainingDivergedError)

parser = argparse.ArgumentParser(
    description='Machine-vision quality pipeline runner.'
)
parser.add_argument('command', choices=STAGES + ('all',),
                    help='The stage to run, or "all" to run every stage.')
parser.add_argument('--config', required=True, metavar='FILE_PATH',
                    type=str, help='The YAML run configuration.')
parser.add_argument('--seed', default=None, type=int,
                    help='Overrides the seed of the configuration.')
parser.add_argument('-j', '--jobs', default=None, type=int,
                    help='The number of worker processes. 0 uses every '
                         'CPU, 1 runs everything in the main process.')
parser.add_argument('--out', default=None, metavar='DIR', type=str,
                    help='Overrides the output root of the configuration.')
parser.add_argument('--log', metavar='CATEGORIES', type=str,
                    default=DEFAULT_LOG,
                    help='Categories separated by semicolons.')
parser.add_argument('--log-to-file', metavar=('FILE', 'CATEGORIES'), nargs=2,
                    type=str, default=[], action='append',
                    help='The first argument is the file name in which to log.'
                         ' The second argument is a list of categories '
                         'separated by semicolons. Records are written as '
                         'JSON objects, one per line.')
parser.add_argument('--export-schedule', metavar='FILE_PATH', type=str,
                    help='Writes the schedule of the "all" command as a DOT '
                         'graph.')


def clear_file(fname):
    """
    Erases all of the content of the given file.

    :param str fname: The path to the file to clear.
    """
    directory = os.path.dirname(os.path.abspath(fname))
    os.makedirs(directory, exist_ok=True)
    with open(fname, 'w+'):
        pass


def set_logger(args):
    filters = {f: sys.stdout for f in args.log.split(';') if f}
    structured = []

    for fname, categories in args.log_to_file:
        clear_file(fname)
        log_file = open(fname, 'a', encoding='utf-8')
        structured.append(log_file)
        for category in categories.split(';'):
            filters[category] = log_file

    logger.set_logger(logger.Logger(filters, structured))


def get_schedule(config):
    """
    Returns the schedule running every stage of a run.

    :param RunConfig config: The run configuration.
    :rtype: mvqa.tools.scheduler.Schedule
    """
    return Scheduler().schedule({'report': RunReport(config)})


def export_schedule(schedule, export_path):
    """
    Exports the given schedule as a dot graph. Each horizontally aligned
    elements can be ran in parallel.

    :param mvqa.tools.scheduler.Schedule schedule: The schedule to export.
    :param str export_path: The path to the dot file to write.
    """
    tasks = schedule.tasks()
    varset = sorted({var for task in tasks for var in vars(task)})

    task_to_node = {
        task: Digraph.Node(task.__class__.__name__, **vars(task))
        for task in tasks
    }
    edges = [
        Digraph.Edge(task_to_node[a], task_to_node[b])
        for a in tasks
        for b in tasks
        if len(frozenset(a.provides().values()) &
               frozenset(b.requires().values())) > 0
    ]

    digraph = Digraph([task_to_node[t] for t in tasks], edges)
    dot = gen_dot(digraph, [DataPrinter(var) for var in varset])
    with open(export_path, 'w', encoding='utf-8') as export_file:
        export_file.write(dot)


def on_subgoal_achieved(subgoal):
    logger.log('progress', 'stage {} completed'.format(subgoal))


def run_command(args, config):
    """
    Runs the stage, or every stage, requested on the command line.

    :param argparse.Namespace args: The command-line arguments.
    :param RunConfig config: The run configuration.
    """
    if args.command != 'all':
        STAGE_FUNCTIONS[args.command](config)
        return

    schedule = get_schedule(config)
    if args.export_schedule is not None:
        export_schedule(schedule, args.export_schedule)
    schedule.run(on_subgoal_achieved)


def main(argv=None):
    """
    :param list[str] | None argv: The command-line arguments.
    :rtype: int
    :return: The exit code: 0 on success, 1 if a stage failed, 2 on a
        configuration error.
    """
    args = parser.parse_args(argv)
    set_logger(args)

    try:
        config = load_config(args.config, args.seed, args.jobs, args.out)
        logger.log('info', 'run configured', task=config.task,
                   run_dir=config.run_dir)
        run_command(args, config)
    except ConfigError as e:
        logger.log('error', 'configuration error: {}'.format(e))
        return EXIT_CONFIG_ERROR
    except STAGE_ERRORS as e:
        logger.log('error', '{} failed: {}'.format(args.command, e))
        return EXIT_STAGE_FAILURE
    except Exception:
        with logger.log_stdout('internal-error'):
            traceback.print_exc(file=sys.stdout)
        return EXIT_STAGE_FAILURE

    return EXIT_SUCCESS


if __name__ == '__main__':
    sys.exit(main())
