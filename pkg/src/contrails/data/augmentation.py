"""Augmentação conjunta de imagem e máscara"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import cv2
import numpy as np

from ..config import AugmentationConfig
from ..ingest.labeled_scene import LabeledScene


@dataclass(frozen=True)
class GeometricParams:
    """Parâmetros de uma deformação geométrica"""
    angle_deg: float = 0.0
    scale: float = 1.0
    shift_x: float = 0.0
    shift_y: float = 0.0
    # Deslocamento (dx, dy) de cada canto: superior-esquerdo, superior-direito,
    # inferior-direito, inferior-esquerdo
    corner_offsets: Tuple[Tuple[float, float], ...] = field(default=((0.0, 0.0),) * 4)

    @property
    def has_perspective(self) -> bool:
        return any(dx != 0.0 or dy != 0.0 for dx, dy in self.corner_offsets)

    def matrix(self, height: int, width: int) -> np.ndarray:
        """Matriz 3x3 que leva coordenadas da origem para o destino"""
        cx, cy = (width - 1) / 2.0, (height - 1) / 2.0

        perspective = np.eye(3)
        if self.has_perspective:
            src = np.array([[0, 0], [width - 1, 0], [width - 1, height - 1], [0, height - 1]], dtype=np.float32)
            dst = src + np.asarray(self.corner_offsets, dtype=np.float32)
            perspective = cv2.getPerspectiveTransform(src, dst).astype(np.float64)

        radians = np.deg2rad(self.angle_deg)
        cos_a, sin_a = self.scale * np.cos(radians), self.scale * np.sin(radians)
        to_origin = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
        rotate = np.array([[cos_a, -sin_a, 0.0], [sin_a, cos_a, 0.0], [0.0, 0.0, 1.0]])
        back = np.array([[1.0, 0.0, cx + self.shift_x], [0.0, 1.0, cy + self.shift_y], [0.0, 0.0, 1.0]])

        return back @ rotate @ to_origin @ perspective


@dataclass(frozen=True)
class PhotometricParams:
    """Parâmetros de brilho, contraste e gama"""
    brightness: float = 0.0
    contrast: float = 1.0
    gamma: float = 1.0


def sample_geometric_params(rng: np.random.Generator, cfg: AugmentationConfig,
                            height: int, width: int) -> GeometricParams:
    """Sorteia um conjunto de parâmetros geométricos"""
    # Cada sorteio consome o rng mesmo quando a transformação não dispara,
    # mantendo a sequência estável entre configurações
    rotate_on, scale_on, shift_on, persp_on = rng.random(4) < (
        cfg.rotate_p, cfg.scale_p, cfg.shift_p, cfg.perspective_p
    )
    angle = rng.uniform(-cfg.rotate_limit, cfg.rotate_limit)
    scale = rng.uniform(*cfg.scale_range)
    shift = rng.uniform(-cfg.shift_fraction, cfg.shift_fraction, size=2) * (width, height)
    strength = rng.uniform(*cfg.perspective_strength)
    corners = rng.uniform(-1.0, 1.0, size=(4, 2)) * strength * (width, height)

    return GeometricParams(
        angle_deg=float(angle) if rotate_on else 0.0,
        scale=float(scale) if scale_on else 1.0,
        shift_x=float(shift[0]) if shift_on else 0.0,
        shift_y=float(shift[1]) if shift_on else 0.0,
        corner_offsets=tuple(map(tuple, corners.tolist())) if persp_on and strength > 0 else ((0.0, 0.0),) * 4
    )


def _warp(array: np.ndarray, matrix: np.ndarray, interpolation: int) -> np.ndarray:
    height, width = array.shape
    return cv2.warpPerspective(
        array,
        matrix,
        (width, height),
        flags=interpolation,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=0
    )


def warp_image(image: np.ndarray, params: GeometricParams) -> np.ndarray:
    """Aplica a deformação à imagem (bilinear)"""
    matrix = params.matrix(*image.shape)
    if np.array_equal(matrix, np.eye(3)):
        return image.astype(np.float32, copy=True)
    warped = _warp(image.astype(np.float32), matrix, cv2.INTER_LINEAR)
    return np.clip(warped, 0.0, 1.0)


def warp_mask(mask: np.ndarray, params: GeometricParams) -> np.ndarray:
    """Aplica a deformação à máscara (vizinho mais próximo, preserva binaridade)"""
    matrix = params.matrix(*mask.shape)
    if np.array_equal(matrix, np.eye(3)):
        return mask.astype(np.uint8, copy=True)
    return _warp(mask.astype(np.uint8), matrix, cv2.INTER_NEAREST)


def apply_geometric(image: np.ndarray, mask: np.ndarray,
                    params: GeometricParams) -> Tuple[np.ndarray, np.ndarray]:
    """Aplica a mesma deformação à imagem e à máscara"""
    return warp_image(image, params), warp_mask(mask, params)


def random_geometric(scene: LabeledScene, rng: np.random.Generator,
                     cfg: AugmentationConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Deformação geométrica aleatória aplicada conjuntamente

    Args:
        scene: Cena rotulada
        rng: Gerador com semente
        cfg: Configurações de augmentação

    Returns:
        (imagem, máscara) deformadas, regiões fora do quadro preenchidas com 0
    """
    params = sample_geometric_params(rng, cfg, *scene.shape)
    return apply_geometric(scene.image, scene.mask, params)


def sample_photometric_params(rng: np.random.Generator, cfg: AugmentationConfig) -> PhotometricParams:
    """Sorteia brilho, contraste e gama"""
    brightness_on, contrast_on, gamma_on = rng.random(3) < (cfg.brightness_p, cfg.contrast_p, cfg.gamma_p)
    brightness = rng.uniform(-cfg.brightness_limit, cfg.brightness_limit)
    contrast = rng.uniform(1.0 - cfg.contrast_limit, 1.0 + cfg.contrast_limit)
    gamma = rng.uniform(*cfg.gamma_range)

    return PhotometricParams(
        brightness=float(brightness) if brightness_on else 0.0,
        contrast=float(contrast) if contrast_on else 1.0,
        gamma=float(gamma) if gamma_on else 1.0
    )


def apply_photometric(image: np.ndarray, params: PhotometricParams) -> np.ndarray:
    """out = clamp((image - 0.5) * c + 0.5 + b, 0, 1) ** g"""
    if params == PhotometricParams():
        return image.astype(np.float32, copy=True)
    adjusted = (image.astype(np.float32) - 0.5) * params.contrast + 0.5 + params.brightness
    return np.power(np.clip(adjusted, 0.0, 1.0), params.gamma).astype(np.float32)


def random_photometric(image: np.ndarray, rng: np.random.Generator, cfg: AugmentationConfig) -> np.ndarray:
    """
    Variação aleatória de brilho, contraste e gama (somente na imagem)

    Args:
        image: Imagem em [0, 1]
        rng: Gerador com semente
        cfg: Configurações de augmentação

    Returns:
        Imagem ajustada em [0, 1]
    """
    return apply_photometric(image, sample_photometric_params(rng, cfg))


def _axis_window(size: int, out_size: int, rng: Optional[np.random.Generator]) -> Tuple[slice, slice]:
    """Janelas (origem, destino) de um eixo para recorte ou preenchimento"""
    if size >= out_size:
        start = int(rng.integers(0, size - out_size + 1)) if rng is not None else (size - out_size) // 2
        return slice(start, start + out_size), slice(0, out_size)

    offset = int(rng.integers(0, out_size - size + 1)) if rng is not None else (out_size - size) // 2
    return slice(0, size), slice(offset, offset + size)


def pad_or_crop(image: np.ndarray, mask: np.ndarray, out_size: int,
                rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ajusta imagem e máscara para out_size x out_size

    Eixos maiores são recortados, eixos menores preenchidos com 0. Com `rng`
    a janela é sorteada uniformemente (treino); sem ele fica centralizada
    (avaliação).

    Args:
        image: Imagem 2-D
        mask: Máscara 2-D do mesmo formato
        out_size: Tamanho final (múltiplo de 32)
        rng: Gerador para janelas aleatórias

    Returns:
        (imagem, máscara) no tamanho final
    """
    if out_size % 32 != 0:
        raise ValueError(f"out_size deve ser múltiplo de 32 (recebido {out_size})")

    src_rows, dst_rows = _axis_window(image.shape[0], out_size, rng)
    src_cols, dst_cols = _axis_window(image.shape[1], out_size, rng)

    out_image = np.zeros((out_size, out_size), dtype=np.float32)
    out_mask = np.zeros((out_size, out_size), dtype=np.uint8)
    out_image[dst_rows, dst_cols] = image[src_rows, src_cols]
    out_mask[dst_rows, dst_cols] = mask[src_rows, src_cols]

    return out_image, out_mask


def eval_frame(scene: LabeledScene, out_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Quadro de avaliação: centralizado e sem augmentação"""
    return pad_or_crop(scene.image, scene.mask, out_size)
