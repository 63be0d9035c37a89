"""
Toy training recipes: 200 synthetic crop pairs per model kind, degraded by
seeded Gaussian noise whose level gives the target. They train in seconds
and are used to check that a model kind can learn at all.

The recipes are smaller than the run defaults: detection and
face models see 32x32 crops instead of 224x224 and 112x112, with batches of
16 and 4 face subsets of 8. Plate models keep their 94x24 input. Every
recipe runs 30 epochs, and the noise standard deviation is 4 per level over
levels 0 to 9.
"""

import numpy as np

from mvqa.backends.synthetic import render_text_mask
from mvqa.core.utils import stable_seed
from mvqa.dataset.synthetic import identity_pattern, person_image
from mvqa.models.inference import prepare_crop
from mvqa.training.trainer import (
    Sample, TrainConfig, face_subsets, train_on_samples
)

TOY_PAIRS = 200
TOY_LEVELS = 10
NOISE_STEP = 4.0
TOY_TRAIN_FRACTION = 0.8

RECIPES = {
    'detection': dict(task='object', target='delta_object_iou',
                      input_size=(32, 32), batch_size=16, epochs=30),
    'face': dict(task='face_recognition', target='face_delta',
                 input_size=(32, 32), batch_size=4, epochs=30,
                 subset_size=8),
    'plate': dict(task='plate', target='jaro', input_size=(94, 24),
                  batch_size=16, epochs=30),
}


def recipe_config(name, seed=0, **overrides):
    """
    :param str name: detection, face or plate.
    :param int seed: The run seed.
    :rtype: TrainConfig
    """
    values = dict(RECIPES[name])
    values.update(overrides)
    return TrainConfig(seed=seed, **values)


def _object_crop(rng):
    pixels = np.full((32, 32), 128.0)
    w, h = rng.integers(12, 25, size=2)
    x0, y0 = rng.integers(2, 32 - w - 1), rng.integers(2, 32 - h - 1)
    sign = 1.0 if rng.integers(0, 2) else -1.0
    pixels[y0:y0 + h, x0:x0 + w] += sign * rng.integers(72, 113)
    return pixels


def _plate_crop(rng):
    text = ''.join(rng.choice(list('ABCDEFGHJKLMNPRSTUVWXYZ0123456789'),
                              size=6))
    mask = render_text_mask(text, 1)
    pixels = np.full((mask.shape[0] + 6, mask.shape[1] + 6), 230.0)
    pixels[3:-3, 3:-3][mask] = 230.0 - rng.integers(36, 161)
    return pixels


def _degrade(rng, pixels, level):
    noisy = pixels + rng.normal(0.0, NOISE_STEP * level, size=pixels.shape)
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def toy_samples(config, count=TOY_PAIRS, seed=0):
    """
    Renders the toy pairs of a configuration's model kind, split into train
    and val.

    :param TrainConfig config: A recipe configuration.
    :param int count: The number of pairs.
    :param int seed: The data seed.
    :rtype: list[Sample]
    """
    rng = np.random.default_rng(stable_seed('toy', config.kind, seed))
    order = rng.permutation(count)
    n_train = int(round(TOY_TRAIN_FRACTION * count))
    pattern = identity_pattern(rng)

    samples = []
    for i in range(count):
        level = int(rng.integers(0, TOY_LEVELS))
        if config.kind == 'face':
            ref = person_image(rng, pattern).astype(np.float64)
            target = level / (TOY_LEVELS - 1)
        elif config.kind == 'plate':
            ref = _plate_crop(rng)
            target = 1.0 - level / (TOY_LEVELS - 1)
        else:
            ref = _object_crop(rng)
            target = level / (TOY_LEVELS - 1)

        comp = _degrade(rng, ref, level)
        ref = np.clip(np.rint(ref), 0, 255).astype(np.uint8)
        split = 'train' if order[i] < n_train else 'val'
        samples.append(Sample(
            ('toy', 'pair{:04d}'.format(i)), split,
            (prepare_crop(ref, config.size, config.channels),),
            (prepare_crop(comp, config.size, config.channels),),
            float(target), 'noise', level
        ))
    return samples


def run_recipe(name, seed=0, log_path=None, **overrides):
    """
    Trains a model kind on its toy pairs.

    :param str name: detection, face or plate.
    :param int seed: The run seed.
    :param str | None log_path: Where the per-epoch CSV log is written.
    :rtype: (TrainingResult, list[Sample])
    :return: The training result and the training samples.
    """
    config = recipe_config(name, seed, **overrides)
    samples = toy_samples(config, seed=seed)
    train = [s for s in samples if s.split == 'train']
    val = [s for s in samples if s.split == 'val']
    if config.kind == 'face':
        train = face_subsets(train, config.subset_size, seed)
        val = face_subsets(val, config.subset_size, seed)
    return train_on_samples(config, train, val, log_path), train
