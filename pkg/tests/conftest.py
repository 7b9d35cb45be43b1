"""Fixtures sintéticas compartilhadas pelos testes"""

from pathlib import Path
from typing import Callable, List

import numpy as np
import pytest
import torch
from loguru import logger
from PIL import Image

from src.contrails.config import AugmentationConfig, ModelConfig, RunConfig, Settings
from src.contrails.ingest import ChannelRaster, LabeledScene, append_manifest, save_labeled_scene, write_btdr
from tests.synthetic import diagonal_scene


@pytest.fixture(autouse=True)
def _quiet_logs():
    """Mantém apenas avisos durante os testes"""
    logger.remove()
    logger.add(lambda message: None, level="WARNING")
    yield


@pytest.fixture
def seeded():
    """Torch e numpy com semente fixa"""
    torch.manual_seed(0)
    return np.random.default_rng(0)


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    """ResUNet pequena e sem download de pesos"""
    return ModelConfig(
        encoder_variant="resnet18",
        encoder_depth=4,
        decoder_channels=[32, 16, 8, 8],
        use_pretrained=False
    )


@pytest.fixture
def btdr_scene(tmp_path) -> Callable[..., Path]:
    """Cria um diretório BTDR com as bandas informadas"""

    def _make(shapes=None, bands=(13, 15), seed: int = 0) -> Path:
        shapes = shapes or {band: (40, 48) for band in bands}
        rng = np.random.default_rng(seed)
        directory = tmp_path / f"scene_{seed}"
        for band in bands:
            values = 270.0 + 10.0 * rng.random(shapes[band])
            write_btdr(ChannelRaster(values=values, band_id=band, wavelength_um=10.35 if band == 13 else 12.3),
                       directory / f"C{band:02d}.btdr")
        return directory

    return _make


@pytest.fixture
def write_png(tmp_path) -> Callable[..., Path]:
    """Grava um array como PNG"""

    def _write(array: np.ndarray, name: str = "mask.png") -> Path:
        path = tmp_path / name
        Image.fromarray(array).save(path)
        return path

    return _write


@pytest.fixture
def scene_manifest(tmp_path) -> Callable[..., Path]:
    """Manifesto com cenas diagonais sintéticas de 64x64"""

    def _make(n_train: int = 3, n_eval: int = 2, size: int = 64) -> Path:
        data_dir = tmp_path / "data"
        manifest = data_dir / "manifest.tsv"
        scenes: List[LabeledScene] = (
            [diagonal_scene(size, f"train_{k}", offset=4 * k - 4, split="train") for k in range(n_train)]
            + [diagonal_scene(size, f"eval_{k}", offset=6 * k - 3, split="eval") for k in range(n_eval)]
        )
        for scene in scenes:
            paths = save_labeled_scene(scene, data_dir / "scenes")
            append_manifest(manifest, scene.scene_id, paths["image"], paths["mask"], scene.split_tag)
        return manifest

    return _make


@pytest.fixture
def run_settings(tmp_path, tiny_model_config) -> Callable[..., Settings]:
    """Configurações de treino rápidas sobre um manifesto"""

    def _make(manifest: Path, output: str = "run", **run_fields) -> Settings:
        run = RunConfig.model_validate({
            "loss_id": "dice",
            "steps": 4,
            "batch_size": 2,
            "eval_every": 2,
            "checkpoint_every": 2,
            "learning_rate": 1e-3,
            "seed": 3,
            "manifest_path": str(manifest),
            "output_dir": str(tmp_path / output),
            **run_fields,
        })
        return Settings(
            model=tiny_model_config,
            augmentation=AugmentationConfig(out_size=64),
            run=run
        )

    return _make
