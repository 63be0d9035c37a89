import numpy as np
import pytest
import torch
import torch.nn as nn

from mvqa.core.errors import ModelConfigError, ModelInputError
from mvqa.models.inference import (
    crops_to_tensor, predict_detection_quality, predict_face_quality,
    predict_plate_quality, prepare_crop
)
from mvqa.models.networks import (
    DetectionQualityModel, FaceQualityModel, PlateQualityModel, build_model,
    kind_for_target
)

SIZE = (32, 32)


def crop(seed, size=SIZE, channels=3):
    rng = np.random.default_rng(seed)
    shape = (size[1], size[0]) if channels == 1 else \
        (size[1], size[0], channels)
    return rng.integers(0, 256, size=shape).astype(np.uint8)


def randomize_heads(model, seed=0):
    torch.manual_seed(seed)
    for module in model.head.modules():
        if isinstance(module, nn.Linear):
            nn.init.normal_(module.weight, std=0.5)
            nn.init.normal_(module.bias, std=0.5)
    return model


class TestUntrainedModels(object):
    def test_detection_predicts_zero(self):
        model = DetectionQualityModel(input_size=SIZE)
        assert predict_detection_quality(model, crop(0), crop(1)) == 0.0

    def test_face_predicts_zero(self):
        model = FaceQualityModel(input_size=SIZE)
        pairs = [(crop(k), crop(k + 10)) for k in range(3)]
        assert predict_face_quality(model, pairs) == 0.0

    def test_plate_predicts_half(self):
        model = PlateQualityModel(input_size=(40, 12))
        assert predict_plate_quality(model, crop(0, (40, 12), 1)) == 0.5


def test_identical_inputs_have_a_zero_difference_branch():
    model = DetectionQualityModel(input_size=SIZE).eval()
    pixels = crop(3)
    tensor = crops_to_tensor([pixels, crop(4)])
    with torch.no_grad():
        feats = model.pair_features(tensor, tensor)
    third = feats.shape[1] // 3
    assert torch.allclose(feats[:, 2 * third:], torch.zeros_like(
        feats[:, 2 * third:]), atol=1e-6)
    assert torch.allclose(feats[:, :third], feats[:, third:2 * third],
                          atol=1e-6)


def test_face_prediction_ignores_pair_order():
    model = randomize_heads(FaceQualityModel(input_size=SIZE, subset_size=2))
    pairs = [(crop(k), crop(k + 10)) for k in range(5)]
    expected = predict_face_quality(model, pairs)
    assert expected != 0.0
    for order in ([4, 3, 2, 1, 0], [2, 0, 4, 1, 3]):
        assert predict_face_quality(model, [pairs[i] for i in order]) == \
            expected


def test_face_prediction_needs_pairs():
    with pytest.raises(ValueError):
        predict_face_quality(FaceQualityModel(input_size=SIZE), [])


def test_plate_prediction_is_bounded():
    model = randomize_heads(PlateQualityModel(input_size=(40, 12)), seed=1)
    for seed in range(8):
        value = predict_plate_quality(model, crop(seed, (40, 12), 1))
        assert 0.0 <= value <= 1.0


def test_wrong_crop_shape():
    model = DetectionQualityModel(input_size=SIZE)
    with pytest.raises(ModelInputError):
        predict_detection_quality(model, crop(0, (16, 16)), crop(1))
    with pytest.raises(ModelInputError):
        predict_detection_quality(model, crop(0), crop(1, channels=1))
    plate = PlateQualityModel(input_size=(40, 12))
    with pytest.raises(ModelInputError):
        predict_plate_quality(plate, crop(0, (12, 40), 1))


def test_prepare_crop():
    gray = np.full((10, 20), 50, dtype=np.uint8)
    assert prepare_crop(gray, (32, 16), 3).shape == (16, 32, 3)
    assert prepare_crop(gray, (20, 10), 1).shape == (10, 20)
    rgb = np.zeros((7, 9, 3), dtype=np.uint8)
    assert prepare_crop(rgb, (4, 4), 1).shape == (4, 4)
    model = DetectionQualityModel(input_size=SIZE)
    prepared = prepare_crop(gray, model.input_size, model.in_channels)
    assert predict_detection_quality(model, prepared, prepared) == 0.0


def test_build_model():
    model = build_model('detection', 'face', {'input_size': [32, 32],
                                              'hidden': 8})
    assert isinstance(model, DetectionQualityModel)
    assert model.task == 'face' and model.input_size == (32, 32)
    assert model.config() == {'backbone': 'tiny', 'in_channels': 3,
                              'input_size': [32, 32], 'hidden': 8}
    with pytest.raises(ModelConfigError):
        build_model('segmentation', 'object')
    with pytest.raises(ModelConfigError):
        build_model('detection', 'object', {'backbone': 'vgg'})
    with pytest.raises(ModelConfigError):
        build_model('face', 'face_recognition',
                    {'backbone': 'mobilenet_v3_small'})


@pytest.mark.parametrize('target, kind', [
    ('delta_object_iou', 'detection'), ('object_iou', 'detection'),
    ('mean_iou', 'detection'), ('face_delta', 'face'), ('jaro', 'plate'),
    ('jaro_frame', 'plate'),
])
def test_kind_for_target(target, kind):
    assert kind_for_target(target) == kind
