"""Diferença de temperatura de brilho (BTD) e normalização"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from ..exceptions import InvalidRasterError, ShapeMismatchError, WavelengthOrderError
from .scene_loader import ChannelRaster


@dataclass
class BTDImage:
    """Diferença de temperatura de brilho entre duas bandas (K)"""
    values: np.ndarray
    source_bands: Tuple[int, int]
    valid_mask: np.ndarray

    def __post_init__(self):
        self.valid_mask = np.asarray(self.valid_mask, dtype=bool)
        if self.values.shape != self.valid_mask.shape:
            raise ShapeMismatchError("BTD valid mask", self.values.shape, self.valid_mask.shape)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass
class NormalizedImage:
    """Imagem BTD mapeada para [0, 1] com os parâmetros usados"""
    values: np.ndarray
    lo_percentile: float
    hi_percentile: float
    lo_value: float
    hi_value: float
    degenerate: bool = False
    source_bands: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        """Parâmetros de normalização (sem os pixels)"""
        params = {
            "lo_percentile": self.lo_percentile,
            "hi_percentile": self.hi_percentile,
            "lo_value": self.lo_value,
            "hi_value": self.hi_value,
            "degenerate": self.degenerate,
        }
        if self.source_bands is not None:
            params["source_bands"] = ",".join(str(band) for band in self.source_bands)
        return params


def compute_btd(c13: ChannelRaster, c15: ChannelRaster, check_wavelength: bool = True) -> BTDImage:
    """
    Calcula BTD = BT(banda longa) - BT(banda curta)

    Args:
        c13: Banda de menor comprimento de onda (10.35 µm)
        c15: Banda de maior comprimento de onda (12.3 µm)
        check_wavelength: Exige c13.wavelength_um < c15.wavelength_um

    Returns:
        Imagem BTD com máscara de validade combinada
    """
    if c13.values.shape != c15.values.shape:
        raise ShapeMismatchError("BTD inputs", c13.values.shape, c15.values.shape, band=c15.band_id)

    if check_wavelength and not c13.wavelength_um < c15.wavelength_um:
        raise WavelengthOrderError(
            f"band {c13.band_id} ({c13.wavelength_um} µm) must have a shorter wavelength "
            f"than band {c15.band_id} ({c15.wavelength_um} µm)",
            subtrahend=c13.band_id, minuend=c15.band_id
        )

    valid = c13.valid & c15.valid
    values = c15.values.astype(np.float64) - c13.values.astype(np.float64)
    values = np.where(valid, values, 0.0)

    return BTDImage(values=values, source_bands=(c13.band_id, c15.band_id), valid_mask=valid)


def normalize(btd: BTDImage, lo_percentile: float = 2.0, hi_percentile: float = 98.0) -> NormalizedImage:
    """
    Normaliza a imagem BTD por percentis para o intervalo [0, 1]

    Args:
        btd: Imagem BTD
        lo_percentile: Percentil mapeado para 0
        hi_percentile: Percentil mapeado para 1

    Returns:
        Imagem normalizada; pixels inválidos ficam em 0
    """
    if not 0.0 <= lo_percentile < hi_percentile <= 100.0:
        raise ValueError(f"percentis inválidos: ({lo_percentile}, {hi_percentile})")

    valid_values = btd.values[btd.valid_mask]
    if valid_values.size == 0:
        logger.error("Imagem BTD sem pixels válidos")
        raise InvalidRasterError("BTD image has no valid pixels", bands=btd.source_bands)

    lo_value, hi_value = np.percentile(valid_values, [lo_percentile, hi_percentile])
    lo_value, hi_value = float(lo_value), float(hi_value)

    out = np.zeros(btd.values.shape, dtype=np.float64)

    if hi_value == lo_value:
        logger.warning(f"Faixa de normalização degenerada (valor {lo_value}); saída constante 0.5")
        out[btd.valid_mask] = 0.5
        return NormalizedImage(out, lo_percentile, hi_percentile, lo_value, hi_value, degenerate=True,
                               source_bands=btd.source_bands)

    scaled = (btd.values - lo_value) / (hi_value - lo_value)
    out[btd.valid_mask] = np.clip(scaled[btd.valid_mask], 0.0, 1.0)

    logger.debug(f"BTD normalizado: p{lo_percentile}={lo_value:.3f} K, p{hi_percentile}={hi_value:.3f} K")
    return NormalizedImage(out, lo_percentile, hi_percentile, lo_value, hi_value, source_bands=btd.source_bands)
