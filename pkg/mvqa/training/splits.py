import numpy as np

from mvqa.core.utils import stable_seed
from mvqa.tools import logger

DEFAULT_FRACTIONS = (0.8, 0.2)


def make_splits(manifest, fractions=DEFAULT_FRACTIONS, seed=0):
    """
    Assigns every source frame, with all its variants, to the train, val or
    test split. The fraction left after train and val goes to test.

    :param Manifest manifest: The manifest to split.
    :param (float, float) fractions: The train and val fractions.
    :param int seed: The run seed.
    :rtype: Manifest
    :raise ValueError: on invalid fractions, or if the train split (or a
        requested val split) would be empty.
    """
    train_f, val_f = fractions
    if train_f < 0 or val_f < 0:
        raise ValueError('negative split fraction: {}'.format(fractions))
    if train_f + val_f > 1.0 + 1e-9:
        raise ValueError('split fractions sum above 1: {}'.format(fractions))

    ids = sorted(f.frame_id for f in manifest.frames)
    rng = np.random.default_rng(stable_seed('splits', seed))
    order = [ids[i] for i in rng.permutation(len(ids))]

    n_train = int(round(train_f * len(ids)))
    n_val = min(int(round(val_f * len(ids))), len(ids) - n_train)
    if n_train == 0:
        raise ValueError('train split of {} frames is empty'.format(len(ids)))
    if val_f > 0 and n_val == 0:
        raise ValueError('val split of {} frames is empty'.format(len(ids)))

    split_of = {}
    for k, frame_id in enumerate(order):
        if k < n_train:
            split_of[frame_id] = 'train'
        elif k < n_train + n_val:
            split_of[frame_id] = 'val'
        else:
            split_of[frame_id] = 'test'

    logger.log('info', 'split manifest', train=n_train, val=n_val,
               test=len(ids) - n_train - n_val)
    return manifest.with_frames(
        f.with_split(split_of[f.frame_id]) for f in manifest.frames
    )
