"""
Transformada de Hough suave e diferenciável

Cada pixel vota em todas as retas (ρ, θ) discretizadas com peso
mask(x, y) * k(|x' cos θ + y' sin θ - ρ| / w_ρ), onde k(d) = max(0, 1 - d) é o
kernel triangular e (x', y') são coordenadas relativas ao centro da imagem.
O kernel triangular equivale à interpolação linear do voto clássico, então
cada pixel contribui para no máximo dois bins de ρ por θ. A acumulação é
linear na máscara e portanto diferenciável em relação a ela.
"""

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np
import torch
from loguru import logger

from ..exceptions import ShapeMismatchError

# Limite de elementos (θ x pixels) processados por bloco
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class HoughGrid:
    """Discretização do espaço (ρ, θ) para imagens de um tamanho fixo"""
    image_height: int
    image_width: int
    n_theta: int = 180
    rho_resolution: float = 1.0

    @cached_property
    def rho_max(self) -> float:
        """Metade da diagonal da imagem"""
        return 0.5 * math.hypot(self.image_height, self.image_width)

    @cached_property
    def n_half(self) -> int:
        return int(math.floor(self.rho_max / self.rho_resolution + 1e-9))

    @property
    def n_rho(self) -> int:
        return 2 * self.n_half + 1

    @cached_property
    def theta_values(self) -> np.ndarray:
        """θ uniforme em [0, π)"""
        return np.arange(self.n_theta) * (np.pi / self.n_theta)

    @cached_property
    def rho_values(self) -> np.ndarray:
        """ρ uniforme e simétrico em [-rho_max, rho_max]"""
        return (np.arange(self.n_rho) - self.n_half) * self.rho_resolution

    @property
    def origin(self) -> Tuple[float, float]:
        """Centro da imagem (x, y)"""
        return (self.image_width - 1) / 2.0, (self.image_height - 1) / 2.0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rho, self.n_theta


def build_grid(height: int, width: int, n_theta: int = 180, rho_resolution: float = 1.0) -> HoughGrid:
    """
    Cria a grade de Hough para imagens height x width

    Args:
        height: Altura em pixels
        width: Largura em pixels
        n_theta: Bins de θ
        rho_resolution: Largura do bin de ρ (pixels)

    Returns:
        Grade com origem no centro da imagem
    """
    if height <= 0 or width <= 0:
        raise ValueError(f"dimensões inválidas: {height}x{width}")
    if n_theta < 2:
        raise ValueError(f"n_theta deve ser >= 2 (recebido {n_theta})")
    if rho_resolution <= 0:
        raise ValueError(f"rho_resolution deve ser positivo (recebido {rho_resolution})")
    return HoughGrid(height, width, n_theta, float(rho_resolution))


@dataclass
class HoughAccumulator:
    """Mapa de votos sobre a grade, indexado (rho_bin, theta_bin)"""
    values: torch.Tensor
    grid: HoughGrid
    raw: torch.Tensor | None = None
    length: torch.Tensor | None = None

    def numpy(self) -> np.ndarray:
        return self.values.detach().cpu().numpy()


@dataclass(frozen=True)
class _VoteTables:
    lower: torch.Tensor   # (n_theta, HW) índice plano do bin inferior (com deslocamento de θ)
    frac: torch.Tensor    # (n_theta, HW) peso do bin superior
    padded_rho: int


@lru_cache(maxsize=8)
def _vote_tables(grid: HoughGrid, device: str, dtype: torch.dtype) -> _VoteTables:
    """Posição fracionária de cada pixel em cada θ (cacheada por grade)"""
    cx, cy = grid.origin
    ys, xs = np.mgrid[0:grid.image_height, 0:grid.image_width]
    xs = (xs.ravel() - cx).astype(np.float64)
    ys = (ys.ravel() - cy).astype(np.float64)

    theta = grid.theta_values
    r = np.cos(theta)[:, None] * xs[None, :] + np.sin(theta)[:, None] * ys[None, :]

    # Um bin de margem de cada lado: bins 1..n_rho são os reais
    u = r / grid.rho_resolution + grid.n_half + 1
    lower = np.clip(np.floor(u), 0, grid.n_rho)
    frac = u - lower

    padded = grid.n_rho + 2
    flat_lower = lower.astype(np.int64) + (np.arange(grid.n_theta) * padded)[:, None]

    logger.debug(f"Tabelas de Hough criadas para {grid} ({r.size:,} entradas)")
    return _VoteTables(
        lower=torch.from_numpy(flat_lower.astype(np.int32)).to(device),
        frac=torch.from_numpy(frac).to(device=device, dtype=dtype),
        padded_rho=padded
    )


def _raw_votes(masks: torch.Tensor, grid: HoughGrid) -> torch.Tensor:
    """Votos brutos (B, n_rho, n_theta) de máscaras achatadas (B, H*W)"""
    tables = _vote_tables(grid, str(masks.device), masks.dtype)
    batch, n_pixels = masks.shape
    chunk = max(1, _CHUNK_ELEMENTS // n_pixels)

    out = masks.new_zeros(batch, grid.n_theta * tables.padded_rho)
    weights = masks[:, None, :]
    # Ordem de redução fixa: blocos de θ em sequência, pixels em ordem de linha
    for start in range(0, grid.n_theta, chunk):
        stop = min(start + chunk, grid.n_theta)
        index = tables.lower[start:stop].reshape(-1)
        upper = weights * tables.frac[start:stop]
        lower = weights - upper
        out = out.index_add(1, index, lower.reshape(batch, -1))
        out = out.index_add(1, index + 1, upper.reshape(batch, -1))

    votes = out.view(batch, grid.n_theta, tables.padded_rho)[:, :, 1:-1]
    return votes.transpose(1, 2)


@lru_cache(maxsize=8)
def _line_lengths(grid: HoughGrid, device: str, dtype: torch.dtype) -> torch.Tensor:
    """Comprimento de cada reta dentro da imagem em unidades de voto"""
    ones = torch.ones(1, grid.image_height * grid.image_width, dtype=dtype, device=device)
    return _raw_votes(ones, grid)[0]


def _as_batch(mask) -> Tuple[torch.Tensor, bool]:
    if isinstance(mask, np.ndarray):
        mask = torch.from_numpy(np.ascontiguousarray(mask, dtype=np.float64))
    if mask.dim() == 2:
        return mask.unsqueeze(0), True
    if mask.dim() == 4:
        if mask.shape[1] != 1:
            raise ShapeMismatchError("Hough input channels", (1,), (mask.shape[1],))
        mask = mask[:, 0]
    return mask, False


def soft_accumulate(mask, grid: HoughGrid, eps: float = 1e-6) -> HoughAccumulator:
    """
    Acumulador de Hough suave e normalizado

    Args:
        mask: Máscara de probabilidades (H, W), (B, H, W) ou (B, 1, H, W)
        grid: Grade compatível com a máscara
        eps: Guarda do denominador

    Returns:
        Acumulador com values = votos / max(comprimento da reta, eps)
    """
    masks, single = _as_batch(mask)
    if tuple(masks.shape[-2:]) != (grid.image_height, grid.image_width):
        raise ShapeMismatchError("Hough mask", (grid.image_height, grid.image_width), tuple(masks.shape[-2:]))
    if not masks.is_floating_point():
        masks = masks.to(torch.float32)

    raw = _raw_votes(masks.reshape(masks.shape[0], -1), grid)
    length = _line_lengths(grid, str(masks.device), masks.dtype)
    values = raw / length.clamp_min(eps)

    if single:
        raw, values = raw[0], values[0]
    return HoughAccumulator(values=values, grid=grid, raw=raw, length=length)


def squash(acc: HoughAccumulator, tau: float = 0.25, beta: float = 20.0) -> HoughAccumulator:
    """
    Converte votos normalizados em presença suave de retas

    values' = logistic(beta * (values - tau))
    """
    return HoughAccumulator(
        values=torch.sigmoid(beta * (acc.values - tau)),
        grid=acc.grid,
        raw=acc.raw,
        length=acc.length
    )


def accumulate_numpy(mask: np.ndarray, grid: HoughGrid, eps: float = 1e-6) -> np.ndarray:
    """Acumulador normalizado de uma máscara numpy, em float64"""
    with torch.no_grad():
        return soft_accumulate(np.asarray(mask, dtype=np.float64), grid, eps=eps).numpy()
