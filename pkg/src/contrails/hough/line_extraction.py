"""Extração de retas do acumulador e rasterização para diagnóstico"""

from dataclasses import dataclass, field
from typing import Iterator, List

import numpy as np
from loguru import logger
from numpy.lib.stride_tricks import sliding_window_view

from .hough_transform import HoughAccumulator


@dataclass(frozen=True)
class Line:
    """Reta x' cos θ + y' sin θ = ρ sobre um nó da grade"""
    rho: float
    theta: float
    support: float
    rho_index: int
    theta_index: int


@dataclass
class LineSet:
    """Conjunto de retas extraídas"""
    lines: List[Line] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self) -> Iterator[Line]:
        return iter(self.lines)

    def to_dict(self) -> List[dict]:
        return [
            {"rho": line.rho, "theta": line.theta, "support": line.support}
            for line in self.lines
        ]


def _wrapped_local_max(values: np.ndarray, radius: int) -> np.ndarray:
    """Máximo na janela de Chebyshev, com θ circular e inversão de ρ na borda"""
    if radius == 0:
        return values
    # (ρ, θ + π) equivale a (-ρ, θ); a grade de ρ é simétrica
    left = values[::-1, -radius:]
    right = values[::-1, :radius]
    extended = np.concatenate([left, values, right], axis=1)
    extended = np.pad(extended, ((radius, radius), (0, 0)), constant_values=-np.inf)
    window = 2 * radius + 1
    return sliding_window_view(extended, (window, window)).max(axis=(-2, -1))


def _bin_distance(a: Line, b: Line, n_rho: int, n_theta: int) -> int:
    direct = max(abs(a.rho_index - b.rho_index), abs(a.theta_index - b.theta_index))
    wrapped = max(
        abs(a.rho_index - (n_rho - 1 - b.rho_index)),
        n_theta - abs(a.theta_index - b.theta_index)
    )
    return min(direct, wrapped)


def extract_lines(acc: HoughAccumulator, threshold: float = 0.5, nms_radius: int = 2,
                  min_line_length: float = 8.0) -> LineSet:
    """
    Extrai máximos locais acima do limiar com supressão de não-máximos

    Args:
        acc: Acumulador normalizado (um único mapa)
        threshold: Suporte mínimo
        nms_radius: Raio de supressão em bins (distância de Chebyshev)
        min_line_length: Ignora bins cuja reta cobre menos pixels que isso

    Returns:
        Retas ordenadas por suporte decrescente
    """
    grid = acc.grid
    values = acc.numpy().astype(np.float64)
    if values.ndim != 2:
        raise ValueError(f"esperado um único mapa (n_rho, n_theta), recebido {values.shape}")

    eligible = values >= threshold
    if min_line_length > 0 and acc.length is not None:
        eligible &= acc.length.detach().cpu().numpy() >= min_line_length
    if not eligible.any():
        return LineSet()

    peaks = eligible & (values >= _wrapped_local_max(values, nms_radius))
    rho_idx, theta_idx = np.nonzero(peaks)
    order = np.lexsort((theta_idx, rho_idx, -values[rho_idx, theta_idx]))

    kept: List[Line] = []
    for k in order:
        candidate = Line(
            rho=float(grid.rho_values[rho_idx[k]]),
            theta=float(grid.theta_values[theta_idx[k]]),
            support=float(values[rho_idx[k], theta_idx[k]]),
            rho_index=int(rho_idx[k]),
            theta_index=int(theta_idx[k])
        )
        if all(_bin_distance(candidate, other, grid.n_rho, grid.n_theta) > nms_radius for other in kept):
            kept.append(candidate)

    logger.debug(f"{len(kept)} retas extraídas ({int(peaks.sum())} máximos locais)")
    return LineSet(kept)


def render_lines(lines: LineSet, height: int, width: int) -> np.ndarray:
    """
    Rasteriza cada reta com 1 pixel de largura, recortada ao quadro

    Args:
        lines: Retas a desenhar
        height: Altura da imagem
        width: Largura da imagem

    Returns:
        Máscara binária uint8
    """
    canvas = np.zeros((height, width), dtype=np.uint8)
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0

    for line in lines:
        cos_t, sin_t = np.cos(line.theta), np.sin(line.theta)
        if abs(sin_t) >= abs(cos_t):
            # Mais horizontal: uma linha da imagem por coluna
            cols = np.arange(width)
            rows = np.floor((line.rho - (cols - cx) * cos_t) / sin_t + cy + 0.5).astype(int)
        else:
            rows = np.arange(height)
            cols = np.floor((line.rho - (rows - cy) * sin_t) / cos_t + cx + 0.5).astype(int)

        inside = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
        canvas[rows[inside], cols[inside]] = 1

    return canvas
