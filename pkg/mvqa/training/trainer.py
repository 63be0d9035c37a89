"""
Training of the quality models on the targets of one or several manifests.
"""

import copy
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import torch

from mvqa.core.errors import TrainingDivergedError
from mvqa.core.utils import stable_seed
from mvqa.dataset.labeling import DEFAULT_PADDING, extract_crops
from mvqa.evaluation.correlation import MIN_LENGTH, srcc
from mvqa.models.inference import crops_to_tensor, prepare_crop
from mvqa.models.networks import (
    DEFAULT_INPUT_SIZES, DEFAULT_SUBSET_SIZE, build_model, kind_for_target
)
from mvqa.targets.kinds import check_compatible, kind_by_name
from mvqa.tools import logger
from mvqa.tools.files import write_csv
from mvqa.training.targets import FRAME_LEVEL

LR_SCHEDULES = ('constant', 'cosine', 'step')
INPUT_MODES = ('crop', 'frame')

LOG_COLUMNS = ('epoch', 'train_loss', 'val_loss', 'val_srcc')


@dataclass(frozen=True)
class TrainConfig(object):
    task: str
    target: str
    loss: str = 'mse'
    learning_rate: float = 1e-3
    lr_schedule: str = 'constant'
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    backbone: str = 'tiny'
    input_size: Optional[Tuple[int, int]] = None
    subset_size: int = DEFAULT_SUBSET_SIZE
    pretrained_path: Optional[str] = None
    input_mode: Optional[str] = None
    padding: float = DEFAULT_PADDING
    hidden: int = 64

    def __post_init__(self):
        check_compatible(self.task, self.target)
        if self.loss != 'mse':
            raise ValueError('unsupported loss {!r}'.format(self.loss))
        if self.lr_schedule not in LR_SCHEDULES:
            raise ValueError('lr_schedule must be one of {}, got {!r}'.format(
                ', '.join(LR_SCHEDULES), self.lr_schedule
            ))
        expected = 'frame' if kind_by_name(self.target).per_frame() else 'crop'
        if self.input_mode is not None and self.input_mode != expected:
            raise ValueError('target {} is trained with input_mode {}'.format(
                self.target, expected
            ))
        if self.batch_size < 1 or self.epochs < 0 or self.subset_size < 1:
            raise ValueError('batch_size and subset_size must be >= 1 and '
                             'epochs >= 0')

    @property
    def kind(self):
        return kind_for_target(self.target)

    @property
    def mode(self):
        return 'frame' if kind_by_name(self.target).per_frame() else 'crop'

    @property
    def size(self):
        return tuple(self.input_size or DEFAULT_INPUT_SIZES[self.kind])

    @property
    def channels(self):
        return 1 if self.kind == 'plate' else 3

    def model_config(self):
        res = {'backbone': self.backbone, 'in_channels': self.channels,
               'input_size': self.size,
               'pretrained_path': self.pretrained_path}
        if self.kind == 'detection':
            res['hidden'] = self.hidden
        elif self.kind == 'face':
            res['subset_size'] = self.subset_size
        return res


@dataclass(frozen=True)
class Checkpoint(object):
    state: dict = field(repr=False)
    epoch: int
    train_loss: float
    val_loss: Optional[float]
    val_srcc: Optional[float]


@dataclass(frozen=True)
class Sample(object):
    """
    One training example. `refs` and `comps` hold a single crop, except for
    face subsets.
    """
    key: Tuple[str, str]
    split: str
    refs: tuple = field(repr=False)
    comps: tuple = field(repr=False)
    target: float
    codec: str
    qf: int


@dataclass
class TrainingResult(object):
    model: torch.nn.Module
    checkpoints: list
    best: Checkpoint


def _samples_of_frame(frame, task, rows, config):
    size, channels = config.size, config.channels

    def prep(pixels):
        return prepare_crop(pixels, size, channels)

    if config.mode == 'frame' or config.kind == 'face':
        ref = prep(frame.source.load())
        pairs = {(v.codec, v.qf): (ref, prep(v.image.load()))
                 for v in frame.variants}
    else:
        pairs = {
            (c.object_id, codec, qf): (prep(c.reference), prep(pixels))
            for c in extract_crops(frame, config.padding)
            for codec, qf, pixels in c.variants
        }

    res = []
    for r in rows:
        if config.mode == 'frame' or config.kind == 'face':
            pair = pairs.get((r['codec'], r['qf']))
        else:
            pair = pairs.get((r['object_id'], r['codec'], r['qf']))
        if pair is None:
            continue
        res.append(Sample((task, frame.frame_id), frame.split, (pair[0],),
                          (pair[1],), r['value'], r['codec'], r['qf']))
    return res


def build_samples(config, manifest, rows, splits=('train', 'val')):
    """
    Builds the samples of the frames of the given splits from target rows.

    :param TrainConfig config: The training configuration.
    :param Manifest manifest: The manifest the rows were computed on.
    :param list[dict] rows: Target rows.
    :param tuple[str] splits: The splits to keep.
    :rtype: list[Sample]
    """
    frame_level = config.mode == 'frame'
    by_frame = defaultdict(list)
    for r in rows:
        if r['target_name'] != config.target:
            continue
        if (r['object_id'] == FRAME_LEVEL) != frame_level and \
                config.kind != 'face':
            continue
        by_frame[r['frame_id']].append(r)

    samples = []
    for frame in sorted(manifest.frames, key=lambda f: f.frame_id):
        if frame.split in splits and frame.frame_id in by_frame:
            samples.extend(_samples_of_frame(
                frame, manifest.task, by_frame[frame.frame_id], config
            ))
    return samples


def face_subsets(samples, subset_size, seed):
    """
    Groups face pairs of a same split and (codec, quality) into subsets of
    the given size, the target of a subset being the mean of its pairs'
    targets. The last subset of a group may be smaller.

    :param list[Sample] samples: Single-pair samples.
    :param int subset_size: The subset size.
    :param int seed: The run seed.
    :rtype: list[Sample]
    """
    groups = defaultdict(list)
    for s in samples:
        groups[(s.split, s.codec, s.qf)].append(s)

    res = []
    for (split, codec, qf), members in sorted(groups.items()):
        members = sorted(members, key=lambda s: s.key)
        rng = np.random.default_rng(stable_seed('subsets', seed, codec, qf))
        members = [members[i] for i in rng.permutation(len(members))]
        for start in range(0, len(members), subset_size):
            chunk = members[start:start + subset_size]
            key = (chunk[0].key[0],
                   '+'.join(sorted(s.key[1] for s in chunk)))
            res.append(Sample(
                key, split,
                tuple(s.refs[0] for s in chunk),
                tuple(s.comps[0] for s in chunk),
                float(np.mean([s.target for s in chunk])), codec, qf
            ))
    return res


def mse_loss(pred, target):
    return torch.mean((pred - target) ** 2)


def forward(model, kind, batch):
    """
    Runs a model over a batch of samples.

    :rtype: torch.Tensor
    """
    if kind == 'face':
        return torch.cat([
            model(crops_to_tensor(s.refs)[None], crops_to_tensor(s.comps)[None])
            for s in batch
        ])
    comp = crops_to_tensor([s.comps[0] for s in batch])
    if kind == 'plate':
        return model(comp)
    return model(crops_to_tensor([s.refs[0] for s in batch]), comp)


def _targets(batch):
    return torch.tensor([s.target for s in batch], dtype=torch.float32)


def evaluate(model, kind, samples, batch_size):
    """
    Returns the loss and the predictions of a model over samples.

    :rtype: (float | None, list[float])
    """
    if len(samples) == 0:
        return None, []
    model.eval()
    preds = []
    with torch.no_grad():
        for start in range(0, len(samples), batch_size):
            preds.extend(forward(model, kind,
                                 samples[start:start + batch_size]).tolist())
    err = np.asarray(preds) - np.asarray([s.target for s in samples])
    return float(np.mean(err ** 2)), preds


def _safe_srcc(preds, samples):
    targets = [s.target for s in samples]
    if len(preds) < MIN_LENGTH:
        return None
    return srcc(preds, targets)


def _scheduler(config, optimizer):
    if config.lr_schedule == 'cosine':
        return torch.optim.lr_scheduler.CosineAnnealingLR(
            optimizer, T_max=max(1, config.epochs)
        )
    if config.lr_schedule == 'step':
        return torch.optim.lr_scheduler.StepLR(
            optimizer, step_size=max(1, config.epochs // 3), gamma=0.1
        )
    return None


def _best(checkpoints):
    def key(c):
        return (c.val_srcc is not None,
                c.val_srcc if c.val_srcc is not None else -math.inf,
                -c.epoch)
    return max(checkpoints, key=key)


def train_on_samples(config, train, val, log_path=None):
    """
    Trains a fresh model on prepared samples.

    :param TrainConfig config: The configuration.
    :param list[Sample] train: The training samples.
    :param list[Sample] val: The validation samples.
    :param str | None log_path: Where the per-epoch CSV log is written.
    :rtype: TrainingResult
    :raise TrainingDivergedError: if the loss becomes non-finite.
    """
    assert all(s.split == 'train' for s in train), \
        'training sample from a non-train frame'
    if len(train) == 0:
        raise ValueError('no training sample for target {}'.format(
            config.target
        ))

    torch.manual_seed(config.seed)
    rng = np.random.default_rng(stable_seed('batches', config.seed))
    model = build_model(config.kind, config.task, config.model_config())
    model.target = config.target
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = _scheduler(config, optimizer)

    def checkpoint(epoch, train_loss):
        val_loss, preds = evaluate(model, config.kind, val, config.batch_size)
        return Checkpoint(copy.deepcopy(model.state_dict()), epoch,
                          train_loss, val_loss, _safe_srcc(preds, val))

    initial_loss, _ = evaluate(model, config.kind, train, config.batch_size)
    checkpoints = [checkpoint(0, initial_loss)]

    for epoch in range(1, config.epochs + 1):
        model.train()
        total = 0.0
        for idx in np.array_split(rng.permutation(len(train)),
                                  math.ceil(len(train) / config.batch_size)):
            batch = [train[i] for i in idx]
            optimizer.zero_grad()
            loss = mse_loss(forward(model, config.kind, batch),
                            _targets(batch))
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    'non-finite loss at epoch {}'.format(epoch)
                )
            loss.backward()
            optimizer.step()
            total += float(loss) * len(batch)
        if scheduler is not None:
            scheduler.step()

        checkpoints.append(checkpoint(epoch, total / len(train)))
        c = checkpoints[-1]
        logger.log('progress', 'epoch done', epoch=epoch,
                   train_loss=round(c.train_loss, 6), val_srcc=c.val_srcc)

    if log_path is not None:
        write_csv(log_path, LOG_COLUMNS, [
            [c.epoch, repr(c.train_loss), '' if c.val_loss is None else
             repr(c.val_loss), '' if c.val_srcc is None else repr(c.val_srcc)]
            for c in checkpoints
        ])

    best = _best(checkpoints)
    model.load_state_dict(best.state)
    model.eval()
    return TrainingResult(model, checkpoints, best)


def train_model(config, manifests, targets, log_path=None):
    """
    Trains a model on the train frames of the given manifests, validating on
    their val frames. Several manifests are pooled, which is how the general
    detection model is trained.

    :param TrainConfig config: The configuration.
    :param list[Manifest] manifests: Split manifests.
    :param list[list[dict]] targets: The target rows of each manifest.
    :param str | None log_path: Where the per-epoch CSV log is written.
    :rtype: TrainingResult
    """
    if len(manifests) != len(targets):
        raise ValueError('one target set is needed per manifest')

    train, val = [], []
    for manifest, rows in zip(manifests, targets):
        train.extend(build_samples(config, manifest, rows, ('train',)))
        val.extend(build_samples(config, manifest, rows, ('val',)))

    if config.kind == 'face':
        train = face_subsets(train, config.subset_size, config.seed)
        val = face_subsets(val, config.subset_size, config.seed)

    logger.log('info', 'training', task=config.task, target=config.target,
               train=len(train), val=len(val))
    return train_on_samples(config, train, val, log_path)
