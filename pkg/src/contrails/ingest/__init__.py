"""Ingestão de cenas de satélite e pareamento com máscaras"""

from .btd_processor import BTDImage, NormalizedImage, compute_btd, normalize
from .labeled_scene import LabeledScene, load_labeled_scene, pair_with_mask, read_grayscale, save_labeled_scene
from .manifest import ManifestEntry, append_manifest, load_split, read_manifest
from .scene_ingestor import SceneIngestor
from .scene_loader import ChannelRaster, load_scene, read_btdr, write_btdr

__all__ = [
    "BTDImage",
    "ChannelRaster",
    "LabeledScene",
    "ManifestEntry",
    "NormalizedImage",
    "SceneIngestor",
    "append_manifest",
    "compute_btd",
    "load_labeled_scene",
    "load_scene",
    "load_split",
    "normalize",
    "pair_with_mask",
    "read_btdr",
    "read_grayscale",
    "read_manifest",
    "save_labeled_scene",
    "write_btdr",
]
