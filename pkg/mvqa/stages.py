"""
The pipeline stages. Each stage reads what the previous ones wrote in the run
directory and writes its own files plus a summary.json; all writes are
atomic. The scheduler tasks at the end of this module chain the stages for
the `all` command.
"""

import os
from collections import defaultdict
from dataclasses import replace
from functools import partial

import numpy as np

import mvqa
from mvqa.backends import create_backend
from mvqa.core.errors import (
    BackendError, ConfigError, EncoderError, StageError
)
from mvqa.core.images import to_pil
from mvqa.core.types import ImageRef
from mvqa.core.utils import KeyCounter, StopWatch, sha256_of_file, valueclass
from mvqa.dataset.calibration import PsnrHistogram, calibrate_quality_grid
from mvqa.dataset.codecs import (
    codec_available, compute_psnr, encode_variant, variant_filename
)
from mvqa.dataset.labeling import (
    autolabel_frames, dedup_plate_frames, select_face_pairs
)
from mvqa.dataset.manifest import (
    SCHEMA_VERSION, LabeledFrame, Manifest, Variant, check_split_hygiene,
    corpus_dir, encoder_log_dir, read_manifest, write_manifest
)
from mvqa.dataset.synthetic import generate_corpus
from mvqa.evaluation.harness import (
    CorrelationReport, collect_items, evaluate_metric
)
from mvqa.evaluation.report import make_report
from mvqa.metrics import load_metrics, metric_specs_from_file
from mvqa.metrics.model import ModelMetric
from mvqa.models.serialization import save_model
from mvqa.targets.kinds import DETECTION_TASKS
from mvqa.tools import logger
from mvqa.tools.files import atomic_open, read_json, write_json
from mvqa.tools.parallel_tools import effective_jobs, parallel_map
from mvqa.tools.scheduler import Requirement, Task
from mvqa.training.splits import make_splits
from mvqa.training.targets import (
    TargetSettings, compute_targets, read_targets, required_roles,
    write_targets
)
from mvqa.training.trainer import TrainConfig, train_model

STAGES = ('sweep', 'label', 'targets', 'train', 'eval', 'report')

DEFAULT_METRICS = ('psnr', 'ssim')


def sweep_manifest_path(run_dir):
    return os.path.join(run_dir, 'manifests', 'sweep.jsonl')


def labeled_manifest_path(run_dir):
    return os.path.join(run_dir, 'manifests', 'labeled.jsonl')


def targets_path(run_dir):
    return os.path.join(run_dir, 'targets', 'targets.csv')


def models_dir(run_dir):
    return os.path.join(run_dir, 'models')


def reports_path(run_dir):
    return os.path.join(run_dir, 'eval', 'reports.json')


def report_dir(run_dir):
    return os.path.join(run_dir, 'report')


def write_summary(config, stage, counts, watch, **extra):
    """
    Writes the summary.json of a stage.

    :param RunConfig config: The run configuration.
    :param str stage: The stage name.
    :param dict counts: What the stage produced and skipped.
    :param StopWatch watch: The stage's timings.
    """
    summary = {
        'stage': stage,
        'schema_version': SCHEMA_VERSION,
        'task': config.task,
        'run_id': config.run_id,
        'seed': config.seed,
        'counts': dict(sorted(counts.items())),
        'durations': watch.as_dict(),
        'tool_version': mvqa.__version__,
    }
    summary.update(extra)
    write_json(os.path.join(config.run_dir, stage, 'summary.json'), summary)


def _read_manifest(path, stage):
    if not os.path.exists(path):
        raise StageError('{} needs {}, run the previous stage first'.format(
            stage, path
        ))
    return read_manifest(path)


def _backend(config, role):
    section = config.backends.get(role)
    if section is None:
        raise BackendError('task {} needs a {} backend and none is '
                           'configured'.format(config.task, role))
    return create_backend(role, section['module'], section['options'])


# Sweep

def _write_if_changed(path, pixels):
    if os.path.exists(path):
        try:
            if np.array_equal(ImageRef.from_path(path).load(), pixels):
                return
        except (OSError, ValueError):
            pass
    with atomic_open(path, 'wb') as f:
        to_pil(pixels).save(f, format='PNG')


def load_sources(config):
    """
    Returns the source frames of a run: the synthetic corpus, written under
    the run's corpus directory, or the configured image files.

    :param RunConfig config: The run configuration.
    :rtype: list[LabeledFrame]
    """
    if config.is_synthetic:
        options = config.corpus['synthetic']
        frames = []
        for s in generate_corpus(config.task, int(options['count']),
                                 config.seed,
                                 int(options['images_per_person'])):
            path = os.path.join(corpus_dir(config.run_dir, config.task,
                                           s.source_id), 'source.png')
            _write_if_changed(path, s.pixels)
            frames.append(LabeledFrame(
                s.source_id, ImageRef.from_path(path), s.detections,
                s.plate_strings, person_id=s.person_id,
                source_sha256=sha256_of_file(path)
            ))
        return frames

    frames = []
    seen = set()
    for path in config.corpus['paths']:
        source_id = os.path.splitext(os.path.basename(path))[0]
        if source_id in seen:
            raise StageError('two corpus files are named {}'.format(
                source_id
            ))
        seen.add(source_id)
        try:
            image = ImageRef.from_path(path)
        except OSError as e:
            raise StageError('cannot read corpus image {}: {}'.format(
                path, e
            ))
        frames.append(LabeledFrame(source_id, image,
                                   source_sha256=sha256_of_file(path)))
    return frames


def _reusable(old, path, source):
    if old is None or not os.path.exists(path):
        return False
    if os.path.normpath(old.image.path) != os.path.normpath(path):
        return False
    try:
        current = ImageRef.from_path(path)
    except OSError:
        return False
    return (current.width, current.height) == (source.width, source.height)


def sweep_source(item, codecs, run_dir, task, log_dir):
    """
    Encodes one source at every quality of every codec, reusing the variants
    of a previous sweep when the source digest is unchanged and the file is
    still there.

    :param (LabeledFrame, LabeledFrame | None) item: The source frame and
        its record in the previous sweep, if any.
    :rtype: (list[Variant], dict[str, int], list[(str, int, str)])
    :return: The variants, the counts and the encoder failures.
    """
    frame, previous = item
    if previous is not None and previous.source_sha256 != frame.source_sha256:
        previous = None
    out = corpus_dir(run_dir, task, frame.frame_id)
    variants, counts, failures = [], KeyCounter(), []

    for codec in codecs:
        for qf in codec.grid:
            path = os.path.join(out, variant_filename(codec, qf))
            old = None if previous is None else previous.variant(codec.name,
                                                                 qf)
            if _reusable(old, path, frame.source):
                variants.append(old)
                counts.incr('reused')
                continue
            try:
                image = encode_variant(frame.source, codec, qf, path, log_dir)
            except EncoderError as e:
                logger.log('debug', e.diagnostics())
                failures.append((codec.name, qf, str(e)))
                counts.incr('encode_failure')
                continue
            variants.append(Variant(codec.name, qf, image,
                                    compute_psnr(frame.source, image)))
            counts.incr('encoded')

    return variants, counts.as_dict(), failures


def _target_histogram(section):
    if 'samples' in section:
        return PsnrHistogram.from_samples(section['samples'],
                                          section.get('bin_width'))
    return PsnrHistogram(tuple(section['centers']),
                         tuple(section['weights']))


def calibrate_codecs(config, codecs, sources, counter):
    """
    Replaces the grids of the codecs named in the calibration section by
    calibrated ones.

    :rtype: list[CodecSpec]
    """
    section = config.calibration
    if not section:
        return codecs
    try:
        target = _target_histogram(section['target'])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError('invalid calibration target: {}'.format(e))

    names = section.get('codecs') or [c.name for c in codecs]
    sample = [f.source for f in sources[:int(section.get('sample', 5))]]
    res = []
    for codec in codecs:
        if codec.name in names:
            grid = calibrate_quality_grid(sample, codec, target,
                                          section.get('grid_size'))
            codec = codec.with_grid(grid)
            counter.incr('calibrated_codecs')
        res.append(codec)
    return res


def run_sweep(config):
    """
    Encodes the corpus and writes the sweep manifest.

    :param RunConfig config: The run configuration.
    :rtype: str
    :return: The manifest path.
    """
    watch = StopWatch()
    counter = KeyCounter()
    path = sweep_manifest_path(config.run_dir)

    with watch.measure('sources'):
        sources = load_sources(config)
    if len(sources) == 0:
        raise StageError('the corpus is empty')

    codecs = []
    for codec in config.codecs:
        if codec_available(codec):
            codecs.append(codec)
        elif codec.mandatory:
            raise StageError('mandatory codec {} is not available'.format(
                codec.name
            ))
        else:
            counter.incr('unavailable_codec')
            logger.log('warning', 'codec skipped, encoder not found',
                       codec=codec.name)

    with watch.measure('calibration'):
        codecs = calibrate_codecs(config, codecs, sources, counter)

    previous = {}
    if os.path.exists(path):
        previous = {f.frame_id: f for f in read_manifest(path).frames}

    with watch.measure('encoding'):
        results = parallel_map(
            effective_jobs(config.jobs),
            partial(sweep_source, codecs=codecs, run_dir=config.run_dir,
                    task=config.task,
                    log_dir=encoder_log_dir(config.run_dir)),
            [(f, previous.get(f.frame_id)) for f in sources],
            timeout_callback=lambda cause: logger.log(
                'warning', 'encoding timed out', cause=cause
            )
        )

    mandatory = {c.name for c in codecs if c.mandatory}
    frames = []
    for frame, res in zip(sources, results):
        if res is None:
            raise StageError('encoding of {} failed'.format(frame.frame_id))
        variants, counts, failures = res
        counter.update(counts)
        for codec, qf, error in failures:
            if codec in mandatory:
                raise StageError('mandatory codec {} failed on {} at {}: '
                                 '{}'.format(codec, frame.frame_id, qf, error))
            logger.log('warning', 'variant skipped', frame_id=frame.frame_id,
                       codec=codec, qf=qf, error=error)
        frames.append(frame.with_variants(variants))

    write_manifest(path, Manifest(config.task, tuple(frames), config.seed))
    counter.incr('frames', len(frames))
    write_summary(config, 'sweep', counter.as_dict(), watch,
                  grids={c.name: list(c.grid) for c in codecs})
    logger.log('progress', 'sweep done', frames=len(frames),
               encoded=counter['encoded'], reused=counter['reused'])
    return path


# Label

def _label_faces(config, frames, counter):
    by_person = defaultdict(list)
    by_path = {}
    for f in frames:
        if f.person_id is None:
            counter.incr('no_person')
            continue
        by_person[f.person_id].append(f.source)
        by_path[f.source.path] = f

    pairs = select_face_pairs(by_person, _backend(config, 'detector'),
                              config.seed, counter)
    return [replace(by_path[p.query.path], database=p.database)
            for p in pairs]


def label_frames(config, frames, counter):
    """
    Builds the ground truth of swept frames: auto-labeling with the trusted
    detector, plate deduplication or face pair selection, depending on the
    task.

    :param RunConfig config: The run configuration.
    :param list[LabeledFrame] frames: The swept frames, sorted by id.
    :param KeyCounter counter: Receives the skip reasons.
    :rtype: list[LabeledFrame]
    """
    section = config.label
    if config.task == 'face_recognition':
        return _label_faces(config, frames, counter)

    autolabel = section['autolabel']
    if autolabel is None:
        autolabel = not config.is_synthetic
    if autolabel:
        labeled = autolabel_frames(
            [f.source for f in frames], _backend(config, 'detector'),
            float(section['conf_threshold']), int(section['min_gap']),
            counter
        )
        by_path = {f.source.path: f for f in frames}
        frames = [replace(by_path[l.source.path], detections=l.detections)
                  for l in labeled]

    if config.task == 'plate' and section['dedup']:
        by_id = {f.frame_id: f for f in frames}
        kept = dedup_plate_frames(frames, _backend(config, 'recognizer'),
                                  int(section['dedup_distance']), counter)
        frames = [replace(by_id[k.frame_id], plate_strings=k.plate_strings)
                  for k in kept]
    return frames


def run_label(config, sweep_manifest=None):
    """
    Labels the swept frames, assigns the splits and writes the labeled
    manifest.

    :param RunConfig config: The run configuration.
    :param str | None sweep_manifest: The sweep manifest. Defaults to the
        run's.
    :rtype: str
    """
    watch = StopWatch()
    counter = KeyCounter()
    manifest = _read_manifest(
        sweep_manifest or sweep_manifest_path(config.run_dir), 'label'
    )

    with watch.measure('labeling'):
        frames = label_frames(
            config, sorted(manifest.frames, key=lambda f: f.frame_id), counter
        )
    if len(frames) == 0:
        raise StageError('no frame left after labeling')

    try:
        labeled = make_splits(manifest.with_frames(frames),
                              tuple(config.label['split_fractions']),
                              config.seed)
        check_split_hygiene(labeled)
    except ValueError as e:
        raise StageError('cannot split the labeled frames: {}'.format(e))

    path = labeled_manifest_path(config.run_dir)
    write_manifest(path, labeled)
    for f in labeled.frames:
        counter.incr('split_{}'.format(f.split))
    counter.incr('frames', len(frames))
    write_summary(config, 'label', counter.as_dict(), watch)
    logger.log('progress', 'labeling done', frames=len(frames))
    return path


# Targets

def run_targets(config, labeled_manifest=None):
    """
    Computes the targets of the labeled manifest. Nothing is written if a
    required backend is missing.

    :param RunConfig config: The run configuration.
    :param str | None labeled_manifest: The labeled manifest. Defaults to
        the run's.
    :rtype: str
    """
    watch = StopWatch()
    counter = KeyCounter()
    manifest = _read_manifest(
        labeled_manifest or labeled_manifest_path(config.run_dir), 'targets'
    )
    backends = {role: _backend(config, role)
                for role in required_roles(manifest.task)}
    section = config.targets
    settings = TargetSettings(float(section['match_threshold']),
                              bool(section['class_aware']),
                              float(section['min_confidence']))

    with watch.measure('targets'):
        rows = compute_targets(manifest, backends, settings, config.jobs,
                               counter)

    path = targets_path(config.run_dir)
    write_targets(path, rows)
    for r in rows:
        counter.incr('rows_{}'.format(r['target_name']))
    write_summary(config, 'targets', counter.as_dict(), watch)
    logger.log('progress', 'targets done', rows=len(rows))
    return path


# Train

def _pooled_inputs(config, manifest, rows):
    manifests, targets = [manifest], [rows]
    for run_dir in config.train['pool']:
        manifests.append(_read_manifest(labeled_manifest_path(run_dir),
                                        'train'))
        targets.append(read_targets(targets_path(run_dir)))
    tasks = {m.task for m in manifests}
    if len(manifests) > 1 and not tasks <= set(DETECTION_TASKS):
        raise ConfigError('only detection corpora can be pooled, got '
                          '{}'.format(', '.join(sorted(tasks))))
    return manifests, targets


def train_config(config, spec, pooled):
    """
    :param RunConfig config: The run configuration.
    :param dict spec: A model entry of the train section.
    :param bool pooled: Whether several corpora are pooled.
    :rtype: TrainConfig
    """
    values = {k: v for k, v in spec.items() if k != 'name'}
    if values.get('input_size') is not None:
        values['input_size'] = tuple(values['input_size'])
    values.setdefault('seed', config.seed)
    try:
        return TrainConfig(task='general' if pooled else config.task,
                           **values)
    except (TypeError, ValueError) as e:
        raise ConfigError('invalid model {}: {}'.format(spec['name'], e))


def run_train(config, labeled_manifest=None, target_rows=None):
    """
    Trains every model of the train section and saves it.

    :param RunConfig config: The run configuration.
    :rtype: str
    :return: The models directory.
    """
    watch = StopWatch()
    counter = KeyCounter()
    manifest = _read_manifest(
        labeled_manifest or labeled_manifest_path(config.run_dir), 'train'
    )
    rows = read_targets(target_rows or targets_path(config.run_dir))
    manifests, targets = _pooled_inputs(config, manifest, rows)

    out = models_dir(config.run_dir)
    best = {}
    for spec in config.train['models']:
        train_cfg = train_config(config, spec, len(manifests) > 1)
        log_path = os.path.join(config.run_dir, 'logs',
                                'train_{}.csv'.format(spec['name']))
        with watch.measure(spec['name']):
            try:
                result = train_model(train_cfg, manifests, targets, log_path)
            except ValueError as e:
                raise StageError('cannot train {}: {}'.format(spec['name'],
                                                              e))
        save_model(result.model,
                   os.path.join(out, '{}.pt'.format(spec['name'])))
        best[spec['name']] = {'epoch': result.best.epoch,
                              'val_srcc': result.best.val_srcc}
        counter.incr('models')

    write_summary(config, 'train', counter.as_dict(), watch, best=best)
    logger.log('progress', 'training done', models=len(best))
    return out


# Eval

def _metric_specs(section):
    metrics = section['metrics']
    if metrics is None:
        return [(m, {}) for m in DEFAULT_METRICS]
    if isinstance(metrics, str):
        return metric_specs_from_file(metrics)
    specs = []
    for m in metrics:
        if isinstance(m, str):
            specs.append((m, {}))
        else:
            specs.append((m['module'], m.get('options') or {}))
    return specs


def _model_metrics(config, target, directory):
    res = []
    for spec in config.train['models']:
        path = os.path.join(directory,
                            '{}.pt'.format(spec['name']))
        if spec['target'] == target and os.path.exists(path):
            res.append(ModelMetric(path, spec['name']))
    return res


def time_backend(config, items):
    """
    Measures the time the task's backend takes per distorted item.

    :rtype: dict[str, float]
    """
    role = required_roles(config.task)[0]
    backend = _backend(config, role)
    call = {'detector': 'detect', 'embedder': 'embed',
            'recognizer': 'recognize_plate'}[role]
    watch = StopWatch()
    for item in items:
        image = ImageRef.from_array(item.distorted)
        with watch.measure(role):
            try:
                getattr(backend, call)(image)
            except BackendError:
                pass
    per_call = watch.per_call(role)
    return {} if per_call is None else {role: per_call}


def run_eval(config, labeled_manifest=None, target_rows=None, models=None):
    """
    Evaluates the configured metrics, and the trained models, against the
    targets of the held-out frames.

    :param RunConfig config: The run configuration.
    :rtype: str
    :return: The path of the reports file.
    """
    watch = StopWatch()
    counter = KeyCounter()
    section = config.eval
    manifest = _read_manifest(
        labeled_manifest or labeled_manifest_path(config.run_dir), 'eval'
    )
    rows = read_targets(target_rows or targets_path(config.run_dir))
    target = section['target']

    with watch.measure('items'):
        items = collect_items(manifest, rows, target, section['pooling'],
                              float(section['padding']),
                              tuple(section['splits'] or ()) or None)
    counter.incr('items', len(items))

    plugins, loaded = load_metrics(_metric_specs(section))
    if not loaded:
        raise StageError('some metrics could not be loaded')
    if section['models']:
        plugins.extend(_model_metrics(
            config, target, models or models_dir(config.run_dir)
        ))

    reports = []
    for plugin in plugins:
        with watch.measure(plugin.display_name()):
            reports.append(evaluate_metric(plugin, items, config.task,
                                           target))

    timings = {}
    if section['backend_timing'] and items:
        with watch.measure('backend'):
            timings = time_backend(config, items)

    path = reports_path(config.run_dir)
    write_json(path, {
        'reports': [dict(r.as_dict(), seconds_per_item=r.seconds_per_item)
                    for r in reports],
        'backend_timings': timings,
    })
    counter.incr('metrics', len(reports))
    write_summary(config, 'eval', counter.as_dict(), watch)
    logger.log('progress', 'evaluation done', metrics=len(reports),
               items=len(items))
    return path


# Report

def run_report(config, metric_reports=None):
    """
    Writes the report files from the evaluation results.

    :param RunConfig config: The run configuration.
    :rtype: str
    :return: The report directory.
    """
    watch = StopWatch()
    path = metric_reports or reports_path(config.run_dir)
    if not os.path.exists(path):
        raise StageError('report needs {}, run eval first'.format(path))
    data = read_json(path)
    reports = [CorrelationReport.from_dict(r, r.get('seconds_per_item'))
               for r in data['reports']]

    out = report_dir(config.run_dir)
    with watch.measure('report'):
        written = make_report(reports, out, data.get('backend_timings'))
    write_summary(config, 'report', {'files': len(written),
                                     'metrics': len(reports)}, watch)
    logger.log('progress', 'report written', path=out)
    return out


STAGE_FUNCTIONS = {
    'sweep': run_sweep,
    'label': run_label,
    'targets': run_targets,
    'train': run_train,
    'eval': run_eval,
    'report': run_report,
}


# Scheduling

@Requirement.as_requirement
def SweptManifest(config):
    return [SweepTask(config)]


@Requirement.as_requirement
def LabeledManifest(config):
    return [LabelTask(config)]


@Requirement.as_requirement
def TargetRows(config):
    return [TargetsTask(config)]


@Requirement.as_requirement
def TrainedModels(config):
    return [TrainTask(config)]


@Requirement.as_requirement
def MetricReports(config):
    return [EvalTask(config)]


@Requirement.as_requirement
def RunReport(config):
    return [ReportTask(config)]


@valueclass
class SweepTask(Task):
    def __init__(self, config):
        self.config = config

    def provides(self):
        return {'res': SweptManifest(self.config)}

    def contributes_to(self):
        return ['sweep']

    def run(self):
        return {'res': run_sweep(self.config)}


@valueclass
class LabelTask(Task):
    def __init__(self, config):
        self.config = config

    def requires(self):
        return {'sweep': SweptManifest(self.config)}

    def provides(self):
        return {'res': LabeledManifest(self.config)}

    def contributes_to(self):
        return ['label']

    def run(self, sweep):
        return {'res': run_label(self.config, sweep)}


@valueclass
class TargetsTask(Task):
    def __init__(self, config):
        self.config = config

    def requires(self):
        return {'manifest': LabeledManifest(self.config)}

    def provides(self):
        return {'res': TargetRows(self.config)}

    def contributes_to(self):
        return ['targets']

    def run(self, manifest):
        return {'res': run_targets(self.config, manifest)}


@valueclass
class TrainTask(Task):
    def __init__(self, config):
        self.config = config

    def requires(self):
        return {'manifest': LabeledManifest(self.config),
                'rows': TargetRows(self.config)}

    def provides(self):
        return {'res': TrainedModels(self.config)}

    def contributes_to(self):
        return ['train']

    def run(self, manifest, rows):
        return {'res': run_train(self.config, manifest, rows)}


@valueclass
class EvalTask(Task):
    def __init__(self, config):
        self.config = config

    def requires(self):
        return {'manifest': LabeledManifest(self.config),
                'rows': TargetRows(self.config),
                'models': TrainedModels(self.config)}

    def provides(self):
        return {'res': MetricReports(self.config)}

    def contributes_to(self):
        return ['eval']

    def run(self, manifest, rows, models):
        return {'res': run_eval(self.config, manifest, rows, models)}


@valueclass
class ReportTask(Task):
    def __init__(self, config):
        self.config = config

    def requires(self):
        return {'reports': MetricReports(self.config)}

    def provides(self):
        return {'res': RunReport(self.config)}

    def contributes_to(self):
        return ['report']

    def run(self, reports):
        return {'res': run_report(self.config, reports)}
