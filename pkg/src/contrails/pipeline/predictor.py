"""Inferência em janelas sobrepostas para imagens de tamanho arbitrário"""

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import torch
from loguru import logger
from PIL import Image
from tqdm import tqdm

from ..exceptions import ConfigError
from ..ingest import read_grayscale
from ..model import load_checkpoint

TILE_OVERLAP = 32
OVERLAY_COLOR = np.array([255, 0, 0], dtype=np.float64)
OVERLAY_ALPHA = 0.6


def window_starts(length: int, tile: int, overlap: int = TILE_OVERLAP) -> List[int]:
    """Inícios das janelas ao longo de um eixo; a última encosta na borda"""
    if length <= tile:
        return [0]
    stride = tile - overlap
    if stride <= 0:
        raise ConfigError(f"overlap {overlap} must be smaller than the tile size {tile}")
    starts = list(range(0, length - tile, stride))
    starts.append(length - tile)
    return starts


def predict_array(
    model: torch.nn.Module,
    image: np.ndarray,
    tile_size: int,
    overlap: int = TILE_OVERLAP,
    device: str = "cpu"
) -> np.ndarray:
    """
    Probabilidades de contrail para uma imagem (H, W) em [0, 1]

    Imagens menores que a janela são completadas com zeros; maiores são
    percorridas em janelas com sobreposição e combinadas pelo máximo.

    Returns:
        Mapa de probabilidades (H, W) float32
    """
    height, width = image.shape
    padded_h, padded_w = max(height, tile_size), max(width, tile_size)
    padded = np.zeros((padded_h, padded_w), dtype=np.float32)
    padded[:height, :width] = image

    rows = window_starts(padded_h, tile_size, overlap)
    cols = window_starts(padded_w, tile_size, overlap)
    blended = np.zeros((padded_h, padded_w), dtype=np.float32)

    model.eval()
    windows = [(y, x) for y in rows for x in cols]
    with torch.no_grad():
        for y, x in tqdm(windows, desc="Janelas", disable=len(windows) < 2):
            tile = torch.from_numpy(padded[y:y + tile_size, x:x + tile_size].copy())[None, None].to(device)
            probs = torch.sigmoid(model(tile))[0, 0].cpu().numpy()
            view = blended[y:y + tile_size, x:x + tile_size]
            np.maximum(view, probs, out=view)

    logger.debug(f"Imagem {height}x{width}: {len(windows)} janelas de {tile_size}px")
    return blended[:height, :width]


def overlay_mask(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Composição RGB da imagem em cinza com a máscara em vermelho"""
    gray = np.clip(image, 0.0, 1.0) * 255.0
    rgb = np.repeat(gray[..., None], 3, axis=-1)
    selected = mask.astype(bool)
    rgb[selected] = (1 - OVERLAY_ALPHA) * rgb[selected] + OVERLAY_ALPHA * OVERLAY_COLOR
    return rgb.round().astype(np.uint8)


def predict(
    checkpoint: str | Path,
    image_path: str | Path,
    out_dir: str | Path,
    tile_size: Optional[int] = None,
    threshold: float = 0.5,
    device: str = "cpu"
) -> Dict[str, Path]:
    """
    Segmenta uma imagem e grava a máscara e a sobreposição

    Args:
        checkpoint: Checkpoint .pt (somente leitura)
        image_path: Imagem em tons de cinza ou colorida
        out_dir: Diretório de saída
        tile_size: Janela (padrão: tamanho de treino registrado no checkpoint)
        threshold: Limiar de binarização
        device: Dispositivo torch

    Returns:
        Caminhos {"mask", "overlay"}
    """
    model, _, sidecar = load_checkpoint(checkpoint, map_location=device)
    tile_size = tile_size or sidecar.get("out_size")
    if tile_size is None:
        raise ConfigError("tile_size is required when the checkpoint does not record its training size")

    image_path = Path(image_path)
    image = read_grayscale(image_path).astype(np.float32)
    probs = predict_array(model, image, int(tile_size), device=device)
    mask = (probs >= threshold).astype(np.uint8)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "mask": out_dir / f"{image_path.stem}_mask.png",
        "overlay": out_dir / f"{image_path.stem}_overlay.png",
    }
    Image.fromarray(mask * 255).save(paths["mask"])
    Image.fromarray(overlay_mask(image, mask)).save(paths["overlay"])

    logger.info(f"Predição de {image_path.name}: {int(mask.sum())} pixels de contrail -> {out_dir}")
    return paths
