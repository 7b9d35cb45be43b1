"""ResUNet: decoder U-Net sobre encoder ResNet"""

from pathlib import Path
from typing import Dict, List

import torch
import torch.nn as nn
from loguru import logger
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential
from torchvision import models

from ..config import ModelConfig
from ..exceptions import ConfigError, EncoderWeightsMismatchError, ShapeMismatchError

ENCODER_VARIANTS = {
    "resnet18": (models.resnet18, models.ResNet18_Weights.IMAGENET1K_V1),
    "resnet34": (models.resnet34, models.ResNet34_Weights.IMAGENET1K_V1),
    "resnet50": (models.resnet50, models.ResNet50_Weights.IMAGENET1K_V2),
}

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

_LAYER_NAMES = ("layer1", "layer2", "layer3", "layer4")


def replicate_channels(image: torch.Tensor) -> torch.Tensor:
    """
    Replica um canal em três, copiando os valores

    Aceita (H, W), (1, H, W) ou (B, 1, H, W); retorna (3, H, W) ou (B, 3, H, W).
    """
    if image.dim() == 2:
        image = image.unsqueeze(0)
    channel_dim = image.dim() - 3
    if image.shape[channel_dim] != 1:
        raise ValueError(f"esperado um canal, recebido formato {tuple(image.shape)}")
    repeats = [1] * image.dim()
    repeats[channel_dim] = 3
    return image.repeat(*repeats)


class ResNetEncoder(nn.Module):
    """
    Encoder residual com os nomes de módulos do torchvision

    Estágio 1 é o stem (stride 2); estágios 2..5 são layer1..layer4, cada um
    com blocos output = relu(input + F_res(input)).
    """

    def __init__(self, variant: str, depth: int):
        super().__init__()
        if variant not in ENCODER_VARIANTS:
            raise ConfigError(
                f"unknown encoder variant '{variant}' (available: {sorted(ENCODER_VARIANTS)})",
                variant=variant
            )
        builder, _ = ENCODER_VARIANTS[variant]
        backbone = builder(weights=None)

        self.variant = variant
        self.depth = depth
        self.conv1, self.bn1, self.relu, self.maxpool = backbone.conv1, backbone.bn1, backbone.relu, backbone.maxpool
        for name in _LAYER_NAMES[: depth - 1]:
            setattr(self, name, getattr(backbone, name))

        self.out_channels = [backbone.conv1.out_channels] + [
            self._block_channels(getattr(backbone, name)[-1]) for name in _LAYER_NAMES[: depth - 1]
        ]

    @staticmethod
    def _block_channels(block: nn.Module) -> int:
        last_conv = block.conv3 if hasattr(block, "conv3") else block.conv2
        return last_conv.out_channels

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        features = []
        x = self.relu(self.bn1(self.conv1(x)))
        features.append(x)
        for index, name in enumerate(_LAYER_NAMES[: self.depth - 1]):
            if index == 0:
                x = self.maxpool(x)
            x = getattr(self, name)(x)
            features.append(x)
        return features


class DecoderStage(nn.Module):
    """Upsampling por convolução transposta + concatenação do skip + 2 convoluções"""

    def __init__(self, in_channels: int, skip_channels: int, out_channels: int):
        super().__init__()
        self.up = nn.ConvTranspose2d(in_channels, out_channels, kernel_size=2, stride=2)
        self.conv = nn.Sequential(
            nn.Conv2d(out_channels + skip_channels, out_channels, kernel_size=3, padding=1, bias=False),
            nn.BatchNorm2d(out_channels),
            nn.ReLU(inplace=True),
            nn.Conv2d(out_channels, out_channels, kernel_size=3, padding=1, bias=False),
            nn.BatchNorm2d(out_channels),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor, skip: torch.Tensor | None = None) -> torch.Tensor:
        x = self.up(x)
        if skip is not None:
            x = torch.cat([x, skip], dim=1)
        return self.conv(x)


class SegmentationModel(nn.Module):
    """ResUNet que produz logits de 1 canal com a resolução da entrada"""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = ResNetEncoder(cfg.encoder_variant, cfg.encoder_depth)

        enc_channels = self.encoder.out_channels
        stages = []
        in_channels = enc_channels[-1]
        for k, out_channels in enumerate(cfg.decoder_channels):
            # Estágio k do decoder recebe o skip do estágio (depth - 1 - k) do encoder
            level = cfg.encoder_depth - 1 - k
            skip_channels = enc_channels[level - 1] if level >= 1 else 0
            stages.append(DecoderStage(in_channels, skip_channels, out_channels))
            in_channels = out_channels
        self.decoder = nn.ModuleList(stages)
        self.head = nn.Conv2d(in_channels, cfg.out_channels, kernel_size=1)

        self.register_buffer("input_mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("input_std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))

    @property
    def divisor(self) -> int:
        return 2 ** self.cfg.encoder_depth

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        """
        Args:
            images: (B, 1 ou 3, H, W) em [0, 1], H e W divisíveis por 2^depth

        Returns:
            Logits (B, 1, H, W)
        """
        if images.dim() != 4:
            raise ShapeMismatchError("model input rank", (4,), (images.dim(),))
        height, width = images.shape[-2:]
        if height % self.divisor or width % self.divisor:
            raise ShapeMismatchError(
                f"model input (spatial dims must be divisible by {self.divisor})",
                (height - height % self.divisor, width - width % self.divisor), (height, width)
            )
        if images.shape[1] == 1:
            images = replicate_channels(images)

        x = (images - self.input_mean) / self.input_std
        features = self.encoder(x)

        x = features[-1]
        for k, stage in enumerate(self.decoder):
            level = self.cfg.encoder_depth - 1 - k
            skip = features[level - 1] if level >= 1 else None
            x = stage(x, skip)

        return self.head(x)


def parameter_count(model: nn.Module) -> Dict[str, int]:
    """Contagem de parâmetros por parte do modelo"""
    count = lambda module: sum(p.numel() for p in module.parameters())  # noqa: E731
    return {
        "encoder": count(model.encoder),
        "decoder": count(model.decoder) + count(model.head),
        "total": count(model),
    }


@retry(
    retry=retry_if_exception_type((OSError, RuntimeError)),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=2, max=10)
)
def _download_imagenet_state(variant: str) -> Dict[str, torch.Tensor]:
    """Baixa os pesos ImageNet do torchvision com retry"""
    _, weights = ENCODER_VARIANTS[variant]
    logger.info(f"Baixando pesos {weights} para {variant}")
    return weights.get_state_dict(progress=False)


def load_pretrained_encoder(model: SegmentationModel, weights_source: str = "imagenet") -> SegmentationModel:
    """
    Substitui os parâmetros do encoder por pesos pré-treinados

    O decoder não é alterado.

    Args:
        model: Modelo construído
        weights_source: "imagenet" ou caminho para um state_dict de ResNet

    Returns:
        O mesmo modelo, com o encoder carregado
    """
    if weights_source == "imagenet":
        source_state = _download_imagenet_state(model.cfg.encoder_variant)
    else:
        path = Path(weights_source)
        if not path.exists():
            raise ConfigError(f"weights file not found: {path}", path=str(path))
        source_state = torch.load(path, map_location="cpu", weights_only=True)

    target_state = model.encoder.state_dict()
    selected = {}
    for name, target in target_state.items():
        if name not in source_state:
            logger.error(f"Parâmetro ausente nos pesos: {name}")
            raise EncoderWeightsMismatchError(name, tuple(target.shape), ())
        source = source_state[name]
        if source.shape != target.shape:
            logger.error(f"Formato incompatível em {name}: {tuple(source.shape)} vs {tuple(target.shape)}")
            raise EncoderWeightsMismatchError(name, tuple(target.shape), tuple(source.shape))
        selected[name] = source

    model.encoder.load_state_dict(selected, strict=True)
    logger.info(f"Encoder {model.cfg.encoder_variant} carregado de {weights_source} ({len(selected)} tensores)")
    return model


def build(cfg: ModelConfig) -> SegmentationModel:
    """
    Constrói a ResUNet

    Args:
        cfg: Configurações do modelo

    Returns:
        Modelo (com encoder pré-treinado quando cfg.use_pretrained)
    """
    model = SegmentationModel(cfg)
    if cfg.use_pretrained:
        load_pretrained_encoder(model, cfg.weights_source)

    counts = parameter_count(model)
    logger.info(
        f"ResUNet {cfg.encoder_variant} profundidade {cfg.encoder_depth}: "
        f"{counts['total']:,} parâmetros (encoder {counts['encoder']:,}, decoder {counts['decoder']:,})"
    )
    return model


def forward(model: SegmentationModel, images: torch.Tensor) -> torch.Tensor:
    """Executa o modelo e retorna logits (B, 1, H, W)"""
    return model(images)
