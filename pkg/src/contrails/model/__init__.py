"""Modelo ResUNet e checkpoints"""

from .checkpoint import load_checkpoint, read_sidecar, save_checkpoint
from .resunet import (
    ENCODER_VARIANTS,
    ResNetEncoder,
    SegmentationModel,
    build,
    forward,
    load_pretrained_encoder,
    parameter_count,
    replicate_channels,
)

__all__ = [
    "ENCODER_VARIANTS",
    "ResNetEncoder",
    "SegmentationModel",
    "build",
    "forward",
    "load_checkpoint",
    "load_pretrained_encoder",
    "parameter_count",
    "read_sidecar",
    "replicate_channels",
    "save_checkpoint",
]
