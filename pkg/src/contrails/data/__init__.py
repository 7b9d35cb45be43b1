"""Augmentação e fluxo de lotes de treino"""

from .augmentation import (
    GeometricParams,
    PhotometricParams,
    apply_geometric,
    apply_photometric,
    eval_frame,
    pad_or_crop,
    random_geometric,
    random_photometric,
    sample_geometric_params,
    sample_photometric_params,
    warp_image,
    warp_mask,
)
from .step_stream import Sample, SampleBatch, generate_sample, make_step_stream

__all__ = [
    "GeometricParams",
    "PhotometricParams",
    "Sample",
    "SampleBatch",
    "apply_geometric",
    "apply_photometric",
    "eval_frame",
    "generate_sample",
    "make_step_stream",
    "pad_or_crop",
    "random_geometric",
    "random_photometric",
    "sample_geometric_params",
    "sample_photometric_params",
    "warp_image",
    "warp_mask",
]
