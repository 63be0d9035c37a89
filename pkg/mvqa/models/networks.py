"""
Crop-level quality predictors.

Every model runs one shared backbone over the reference and the compressed
input in a single batch, so that byte-identical inputs give identical
features and a zero difference branch.
"""

import torch
import torch.nn as nn
import torchvision

from mvqa.core.errors import ModelConfigError

TINY_FEATURES = 64
TINY_CHANNELS = (16, 32, 48, TINY_FEATURES)

DEFAULT_INPUT_SIZES = {
    'detection': (224, 224),
    'face': (112, 112),
    'plate': (94, 24),
}

DEFAULT_SUBSET_SIZE = 8


class TinyBackbone(nn.Module):
    """
    Four stride-2 conv/BN/ReLU stages followed by global average pooling.
    """
    def __init__(self, in_channels=3):
        super(TinyBackbone, self).__init__()
        layers = []
        previous = in_channels
        for channels in TINY_CHANNELS:
            layers += [
                nn.Conv2d(previous, channels, kernel_size=3, stride=2,
                          padding=1, bias=False),
                nn.BatchNorm2d(channels),
                nn.ReLU(inplace=True),
            ]
            previous = channels
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)

    def forward(self, x):
        return torch.flatten(self.pool(self.features(x)), 1)


class _TorchvisionBackbone(nn.Module):
    def __init__(self, body, in_channels):
        super(_TorchvisionBackbone, self).__init__()
        self.body = body
        self.in_channels = in_channels

    def forward(self, x):
        if self.in_channels == 1:
            x = x.expand(-1, 3, -1, -1)
        return torch.flatten(self.body(x), 1)


def make_backbone(name, in_channels=3, pretrained_path=None):
    """
    Builds a backbone and returns it with its feature count. Torchvision
    backbones are built without downloading weights; a state dict may be
    given instead.

    :param str name: tiny, mobilenet_v3_small or resnet18.
    :param int in_channels: 1 or 3.
    :param str | None pretrained_path: A backbone state dict file.
    :rtype: (nn.Module, int)
    """
    if name == 'tiny':
        module, features = TinyBackbone(in_channels), TINY_FEATURES
    elif name == 'mobilenet_v3_small':
        net = torchvision.models.mobilenet_v3_small(weights=None)
        module = _TorchvisionBackbone(
            nn.Sequential(net.features, net.avgpool), in_channels
        )
        features = net.classifier[0].in_features
    elif name == 'resnet18':
        net = torchvision.models.resnet18(weights=None)
        features = net.fc.in_features
        net.fc = nn.Identity()
        module = _TorchvisionBackbone(net, in_channels)
    else:
        raise ModelConfigError('backbone', 'tiny, mobilenet_v3_small or '
                               'resnet18', name)

    if pretrained_path is not None:
        state = torch.load(pretrained_path, map_location='cpu',
                           weights_only=True)
        target = module if name == 'tiny' else module.body
        target.load_state_dict(state, strict=False)
    return module, features


def _zero_linear(in_features, out_features=1):
    layer = nn.Linear(in_features, out_features)
    nn.init.zeros_(layer.weight)
    nn.init.zeros_(layer.bias)
    return layer


class QualityModel(nn.Module):
    """
    Base class of the quality models. `config` holds everything needed to
    rebuild the architecture. `target` names the target kind the model
    was trained to predict, if known.
    """
    kind = None
    target = None

    def __init__(self, task, backbone, in_channels, input_size):
        super(QualityModel, self).__init__()
        self.task = task
        self.backbone_name = backbone
        self.in_channels = in_channels
        self.input_size = tuple(input_size)

    def config(self):
        """
        :rtype: dict
        """
        return {
            'backbone': self.backbone_name,
            'in_channels': self.in_channels,
            'input_size': list(self.input_size),
        }

    def pair_features(self, ref, comp):
        """
        Returns the features of both inputs and their difference,
        concatenated.

        :param torch.Tensor ref: (B, C, H, W) reference inputs.
        :param torch.Tensor comp: (B, C, H, W) compressed inputs.
        :rtype: torch.Tensor
        """
        both = self.backbone(torch.cat([ref, comp], dim=0))
        fr, fc = both[:ref.shape[0]], both[ref.shape[0]:]
        return torch.cat([fr, fc, fr - fc], dim=1)


class DetectionQualityModel(QualityModel):
    """
    Predicts a detection degradation (Delta Object IoU, Object IoU or
    mean-IoU) from a reference and a compressed crop. The output is
    unbounded; an untrained model predicts 0.
    """
    kind = 'detection'

    def __init__(self, task='object', backbone='tiny', in_channels=3,
                 input_size=DEFAULT_INPUT_SIZES['detection'], hidden=64,
                 pretrained_path=None):
        super(DetectionQualityModel, self).__init__(task, backbone,
                                                    in_channels, input_size)
        self.hidden = hidden
        self.backbone, features = make_backbone(backbone, in_channels,
                                                pretrained_path)
        self.head = nn.Sequential(
            nn.Linear(3 * features, hidden),
            nn.ReLU(inplace=True),
            _zero_linear(hidden),
        )

    def config(self):
        res = super(DetectionQualityModel, self).config()
        res['hidden'] = self.hidden
        return res

    def forward(self, ref, comp):
        return self.head(self.pair_features(ref, comp)).squeeze(1)


class FaceQualityModel(QualityModel):
    """
    Predicts the face recognition degradation of a subset of query pairs:
    per-pair features are averaged over the subset before a single linear
    layer.
    """
    kind = 'face'

    def __init__(self, task='face_recognition', backbone='tiny',
                 in_channels=3, input_size=DEFAULT_INPUT_SIZES['face'],
                 subset_size=DEFAULT_SUBSET_SIZE, pretrained_path=None):
        if backbone not in ('tiny', 'resnet18'):
            raise ModelConfigError('backbone', 'tiny or resnet18', backbone)
        super(FaceQualityModel, self).__init__(task, backbone, in_channels,
                                               input_size)
        self.subset_size = subset_size
        self.backbone, features = make_backbone(backbone, in_channels,
                                                pretrained_path)
        self.head = _zero_linear(3 * features)

    def config(self):
        res = super(FaceQualityModel, self).config()
        res['subset_size'] = self.subset_size
        return res

    def forward(self, ref, comp):
        """
        :param torch.Tensor ref: (B, N, C, H, W) reference queries.
        :param torch.Tensor comp: (B, N, C, H, W) compressed queries.
        :rtype: torch.Tensor
        """
        b, n = ref.shape[:2]
        feats = self.pair_features(ref.flatten(0, 1), comp.flatten(0, 1))
        return self.head(feats.view(b, n, -1).mean(dim=1)).squeeze(1)


class PlateQualityModel(QualityModel):
    """
    Predicts the Jaro score of a compressed plate crop, in [0, 1]. An
    untrained model predicts 0.5.
    """
    kind = 'plate'

    def __init__(self, task='plate', backbone='tiny', in_channels=1,
                 input_size=DEFAULT_INPUT_SIZES['plate'],
                 pretrained_path=None):
        super(PlateQualityModel, self).__init__(task, backbone, in_channels,
                                                input_size)
        self.backbone, features = make_backbone(backbone, in_channels,
                                                pretrained_path)
        self.head = _zero_linear(features)

    def forward(self, comp):
        return torch.sigmoid(self.head(self.backbone(comp))).squeeze(1)


MODEL_KINDS = {
    m.kind: m
    for m in (DetectionQualityModel, FaceQualityModel, PlateQualityModel)
}


def build_model(kind, task, config=None):
    """
    :param str kind: detection, face or plate.
    :param str task: The task tag the model is trained for.
    :param dict | None config: Constructor arguments.
    :rtype: QualityModel
    """
    if kind not in MODEL_KINDS:
        raise ModelConfigError('kind', ', '.join(sorted(MODEL_KINDS)), kind)
    config = dict(config or {})
    if 'input_size' in config:
        config['input_size'] = tuple(config['input_size'])
    return MODEL_KINDS[kind](task=task, **config)


def kind_for_target(target):
    """
    :param str target: A target name.
    :rtype: str
    """
    if target == 'face_delta':
        return 'face'
    if target in ('jaro', 'jaro_frame'):
        return 'plate'
    return 'detection'
