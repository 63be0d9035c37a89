"""
Codec sweep primitives: encode/decode round trips and PSNR.

JPEG goes through Pillow and needs no external program. Other codecs are
driven by command templates, with the placeholders:

    {input}      the file to encode (encode step) or the bitstream (decode)
    {output}     the bitstream (encode step) or the decoded image (decode)
    {qf}         the quality factor
    {inv_qf}     the quality factor mirrored in the quality range, for
                 encoders whose parameter grows as quality drops (CRF, QP)
"""

import math
import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from mvqa.core.errors import EncoderError, ImageMismatchError
from mvqa.core.images import as_array, to_pil
from mvqa.core.types import ImageRef
from mvqa.tools import logger
from mvqa.tools.files import atomic_open

PSNR_CAP_DB = 100.0

DEFAULT_JPEG_GRID = (10, 30, 50, 70, 90)

_FFMPEG_DECODE = 'ffmpeg -y -loglevel error -i {input} -frames:v 1 {output}'


@dataclass(frozen=True)
class CodecSpec(object):
    name: str
    grid: Tuple[int, ...]
    quality_range: Tuple[int, int] = (1, 100)
    extension: str = 'png'
    mandatory: bool = False
    encode_template: Optional[str] = None
    decode_template: Optional[str] = None
    bitstream_extension: str = 'bin'
    encode_timeout: float = 600.0
    options: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if len(self.grid) == 0:
            raise ValueError('codec {} has an empty grid'.format(self.name))
        if list(self.grid) != sorted(self.grid):
            raise ValueError('codec {} grid is not sorted: {}'.format(
                self.name, self.grid
            ))
        lo, hi = self.quality_range
        if not all(lo <= q <= hi for q in self.grid):
            raise ValueError('codec {} grid {} leaves range {}'.format(
                self.name, self.grid, self.quality_range
            ))

    @property
    def builtin(self):
        return self.encode_template is None

    def with_grid(self, grid):
        return CodecSpec(self.name, tuple(sorted(grid)), self.quality_range,
                         self.extension, self.mandatory, self.encode_template,
                         self.decode_template, self.bitstream_extension,
                         self.encode_timeout, self.options)


def _ffmpeg_encode(args):
    return ('ffmpeg -y -loglevel error -i {input} ' + args +
            ' -frames:v 1 {output}')


PRESETS = {
    'jpeg': dict(grid=DEFAULT_JPEG_GRID, quality_range=(1, 100),
                 extension='jpg', mandatory=True),
    'x264': dict(grid=(11, 21, 31, 41, 51), quality_range=(0, 51),
                 encode_template=_ffmpeg_encode(
                     '-c:v libx264 -crf {inv_qf} -pix_fmt yuv444p'),
                 decode_template=_FFMPEG_DECODE, bitstream_extension='mkv'),
    'x265': dict(grid=(11, 21, 31, 41, 51), quality_range=(0, 51),
                 encode_template=_ffmpeg_encode(
                     '-c:v libx265 -crf {inv_qf} -pix_fmt yuv444p'),
                 decode_template=_FFMPEG_DECODE, bitstream_extension='mkv'),
    'rav1e': dict(grid=(55, 105, 155, 205, 255), quality_range=(0, 255),
                  encode_template=_ffmpeg_encode(
                      '-c:v librav1e -qp {inv_qf}'),
                  decode_template=_FFMPEG_DECODE, bitstream_extension='ivf'),
    'vvenc': dict(grid=(13, 23, 33, 43, 53), quality_range=(0, 63),
                  encode_template=_ffmpeg_encode(
                      '-c:v libvvenc -qp {inv_qf}'),
                  decode_template=_FFMPEG_DECODE, bitstream_extension='266'),
}


def codec_from_config(section):
    """
    Builds a codec from a configuration section: a preset name plus
    overrides.

    :param dict section: At least a 'name' key.
    :rtype: CodecSpec
    """
    section = dict(section)
    name = section.pop('name')
    values = dict(PRESETS.get(name, {}))
    values.update(section)
    if 'grid' not in values:
        raise ValueError('codec {} needs a grid'.format(name))
    values['grid'] = tuple(sorted(int(q) for q in values['grid']))
    values['quality_range'] = tuple(values.get('quality_range', (1, 100)))
    return CodecSpec(name=name, **values)


def _format(template, **values):
    return [token.format(**values) for token in shlex.split(template)]


def _run_logged(cmd, codec, log_path):
    binary = cmd[0]
    if shutil.which(binary) is None:
        raise EncoderError(
            'encoder binary {!r} not found for codec {}'.format(binary,
                                                             codec.name)
        )

    logger.log('debug', 'running encoder', cmd=' '.join(map(shlex.quote, cmd)))
    try:
        result = subprocess.run(cmd, capture_output=True, text=True,
                                timeout=codec.encode_timeout)
    except subprocess.TimeoutExpired as e:
        raise EncoderError('{} timed out'.format(binary),
                           e.stdout or '', e.stderr or '') from e

    if log_path is not None:
        os.makedirs(os.path.dirname(log_path), exist_ok=True)
        with open(log_path, 'a', encoding='utf-8') as f:
            f.write('$ {}\n{}{}\n'.format(' '.join(cmd), result.stdout,
                                         result.stderr))

    if result.returncode != 0:
        raise EncoderError(
            '{} exited with status {}'.format(binary, result.returncode),
            result.stdout, result.stderr
        )


def _encode_external(image, codec, qf, output_path, log_dir):
    lo, hi = codec.quality_range
    stem = os.path.splitext(os.path.basename(output_path))[0]
    log_path = None if log_dir is None else os.path.join(
        log_dir, '{}.log'.format(stem)
    )

    with tempfile.TemporaryDirectory() as tmp:
        source = os.path.join(tmp, 'source.png')
        to_pil(as_array(image)).save(source)
        bitstream = os.path.join(tmp, 'stream.' + codec.bitstream_extension)
        decoded = os.path.join(tmp, 'decoded.' + codec.extension)

        _run_logged(_format(codec.encode_template, input=source,
                            output=bitstream, qf=qf, inv_qf=hi + lo - qf),
                    codec, log_path)
        _run_logged(_format(codec.decode_template, input=bitstream,
                            output=decoded, qf=qf, inv_qf=hi + lo - qf),
                    codec, log_path)
        if not os.path.exists(decoded):
            raise EncoderError('{} produced no decoded image'.format(
                codec.name
            ))
        os.makedirs(os.path.dirname(os.path.abspath(output_path)),
                    exist_ok=True)
        shutil.move(decoded, output_path)


def encode_variant(image, codec, qf, output_path, log_dir=None):
    """
    Encodes an image at a quality factor and writes the decoded result.

    :param ImageRef image: The source image.
    :param CodecSpec codec: The codec.
    :param int qf: The quality factor, within the codec's range.
    :param str output_path: Where the decoded variant is written.
    :param str | None log_dir: Where encoder output is kept.
    :rtype: ImageRef
    :raise EncoderError: if the round trip fails or changes the dimensions.
    """
    lo, hi = codec.quality_range
    if not lo <= qf <= hi:
        raise ValueError('quality {} outside of {} range {}'.format(
            qf, codec.name, codec.quality_range
        ))

    if codec.builtin:
        img = to_pil(as_array(image))
        with atomic_open(output_path, 'wb') as f:
            img.save(f, format='JPEG', quality=int(qf))
    else:
        _encode_external(image, codec, qf, output_path, log_dir)

    try:
        variant = ImageRef.from_path(output_path)
    except (OSError, ValueError) as e:
        raise EncoderError('{} output is not decodable: {}'.format(
            codec.name, e
        )) from e
    if (variant.width, variant.height) != (image.width, image.height):
        raise EncoderError('{} changed dimensions {}x{} -> {}x{}'.format(
            codec.name, image.width, image.height, variant.width,
            variant.height
        ))
    return variant


def psnr_arrays(ref, dist, bit_depth=8):
    """
    :param np.ndarray ref: The reference pixels.
    :param np.ndarray dist: The distorted pixels.
    :param int bit_depth: The bits per channel.
    :rtype: float
    """
    if ref.shape != dist.shape:
        raise ImageMismatchError('shape mismatch: {} vs {}'.format(
            ref.shape, dist.shape
        ))
    mse = float(np.mean(
        (ref.astype(np.float64) - dist.astype(np.float64)) ** 2
    ))
    if mse == 0.0:
        return PSNR_CAP_DB
    peak = float(2 ** bit_depth - 1)
    return min(PSNR_CAP_DB, 10.0 * math.log10(peak * peak / mse))


def compute_psnr(ref, dist):
    """
    Returns the PSNR of a distorted image against its reference over all
    channels. Identical images score the 100 dB cap.

    :param ImageRef ref: The reference.
    :param ImageRef dist: The distorted image.
    :rtype: float
    :raise ImageMismatchError: on different dimensions or bit depths.
    """
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ImageMismatchError('dimension mismatch: {}x{} vs {}x{}'.format(
            ref.width, ref.height, dist.width, dist.height
        ))
    if ref.bit_depth != dist.bit_depth:
        raise ImageMismatchError('bit depth mismatch: {} vs {}'.format(
            ref.bit_depth, dist.bit_depth
        ))
    a, b = ref.load(), dist.load()
    if a.ndim != b.ndim:
        a = a if a.ndim == 3 else np.repeat(a[:, :, None], 3, axis=2)
        b = b if b.ndim == 3 else np.repeat(b[:, :, None], 3, axis=2)
    return psnr_arrays(a, b, ref.bit_depth)


def variant_filename(codec, qf):
    return '{}_{}.{}'.format(codec.name, qf, codec.extension)


def codec_available(codec):
    """
    Returns whether the binaries a codec's templates call can be found.

    :param CodecSpec codec: The codec.
    :rtype: bool
    """
    if codec.builtin:
        return True
    templates = [t for t in (codec.encode_template, codec.decode_template)
                 if t is not None]
    return all(shutil.which(shlex.split(t)[0]) is not None
               for t in templates)
