"""Fluxo infinito de lotes augmentados, determinístico por (semente, passo)"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from loguru import logger

from ..config import AugmentationConfig
from ..exceptions import EmptyDatasetError
from ..ingest.labeled_scene import LabeledScene
from .augmentation import pad_or_crop, random_geometric, random_photometric


@dataclass
class Sample:
    """Par (imagem, máscara) augmentado com sua procedência"""
    image: np.ndarray
    mask: np.ndarray
    scene_id: str
    seed: Tuple[int, int, int]

    def __post_init__(self):
        if self.image.shape != self.mask.shape:
            raise ValueError(f"imagem {self.image.shape} e máscara {self.mask.shape} com formatos diferentes")


@dataclass
class SampleBatch:
    """Lote de amostras de um passo de treino"""
    step: int
    samples: List[Sample]

    @property
    def images(self) -> np.ndarray:
        """Imagens empilhadas (B, H, W)"""
        return np.stack([s.image for s in self.samples])

    @property
    def masks(self) -> np.ndarray:
        """Máscaras empilhadas (B, H, W)"""
        return np.stack([s.mask for s in self.samples])

    def __len__(self) -> int:
        return len(self.samples)


def sample_rng(seed: int, step: int, slot: int) -> np.random.Generator:
    """Gerador da amostra `slot` do passo `step`"""
    return np.random.default_rng(np.random.SeedSequence([seed, step, slot]))


def generate_sample(scenes: Sequence[LabeledScene], cfg: AugmentationConfig,
                    seed: int, step: int, slot: int) -> Sample:
    """
    Gera uma amostra: cena uniforme -> geométrica -> pad/crop -> fotométrica

    Função pura de (seed, step, slot).
    """
    rng = sample_rng(seed, step, slot)
    scene = scenes[int(rng.integers(len(scenes)))]

    image, mask = random_geometric(scene, rng, cfg)
    image, mask = pad_or_crop(image, mask, cfg.out_size, rng=rng)
    image = random_photometric(image, rng, cfg)

    return Sample(image=image, mask=mask, scene_id=scene.scene_id, seed=(seed, step, slot))


def make_step_stream(
    scenes: Sequence[LabeledScene],
    cfg: AugmentationConfig,
    seed: int,
    batch_size: int,
    start_step: int = 0,
    num_workers: int = 0
) -> Iterator[SampleBatch]:
    """
    Cria o fluxo infinito de lotes de treino

    Args:
        scenes: Cenas de treino
        cfg: Configurações de augmentação
        seed: Semente global
        batch_size: Amostras por lote
        start_step: Primeiro passo (retomada de treino)
        num_workers: Threads para gerar amostras (0 = sequencial)

    Returns:
        Iterador de lotes na ordem dos passos
    """
    if not scenes:
        logger.error("Fluxo de passos sem cenas")
        raise EmptyDatasetError("scene list is empty")
    if batch_size <= 0:
        raise ValueError(f"batch_size deve ser positivo (recebido {batch_size})")

    scenes = list(scenes)
    logger.info(
        f"Fluxo de treino: {len(scenes)} cenas, lote {batch_size}, semente {seed}, "
        f"início no passo {start_step}"
    )
    return _stream(scenes, cfg, seed, batch_size, start_step, num_workers)


def _stream(scenes, cfg, seed, batch_size, start_step, num_workers) -> Iterator[SampleBatch]:
    step = start_step
    if num_workers > 0:
        with ThreadPoolExecutor(max_workers=num_workers) as pool:
            while True:
                samples = list(pool.map(
                    lambda slot, k=step: generate_sample(scenes, cfg, seed, k, slot),
                    range(batch_size)
                ))
                yield SampleBatch(step=step, samples=samples)
                step += 1
    else:
        while True:
            samples = [generate_sample(scenes, cfg, seed, step, slot) for slot in range(batch_size)]
            yield SampleBatch(step=step, samples=samples)
            step += 1
