"""Leitura de cenas de satélite pré-baixadas (NetCDF GOES ou BTDR)"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import xarray as xr
from loguru import logger

from ..exceptions import (
    BandNotFoundError,
    InvalidRasterError,
    SceneFileNotFoundError,
    ShapeMismatchError,
)

BTDR_MAGIC = b"BTDR"
BTDR_HEADER = np.dtype([("magic", "S4"), ("height", "<u4"), ("width", "<u4")])

# Comprimentos de onda centrais das bandas infravermelhas do ABI (µm)
ABI_WAVELENGTHS_UM = {
    7: 3.9,
    8: 6.2,
    9: 6.9,
    10: 7.3,
    11: 8.4,
    12: 9.6,
    13: 10.35,
    14: 11.2,
    15: 12.3,
    16: 13.3,
}


@dataclass
class ChannelRaster:
    """Temperatura de brilho (K) de uma única banda"""
    values: np.ndarray
    band_id: int
    wavelength_um: float
    missing: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2 or self.values.shape[0] == 0 or self.values.shape[1] == 0:
            raise InvalidRasterError(
                f"band {self.band_id}: raster must be a non-empty 2-D array, got shape {self.values.shape}",
                band=self.band_id
            )

        non_finite = ~np.isfinite(self.values)
        if self.missing is None:
            self.missing = non_finite
        else:
            self.missing = np.asarray(self.missing, dtype=bool)
            if self.missing.shape != self.values.shape:
                raise ShapeMismatchError("missing-data mask", self.values.shape, self.missing.shape, band=self.band_id)
            if np.any(non_finite & ~self.missing):
                raise InvalidRasterError(
                    f"band {self.band_id}: non-finite values outside the missing-data mask",
                    band=self.band_id
                )

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def valid(self) -> np.ndarray:
        """Pixels com dado válido"""
        return ~self.missing


def wavelength_for_band(band: int) -> float:
    """Comprimento de onda padrão de uma banda ABI"""
    try:
        return ABI_WAVELENGTHS_UM[band]
    except KeyError:
        raise BandNotFoundError(band, "ABI band table") from None


def write_btdr(raster: ChannelRaster, path: str | Path) -> Path:
    """
    Grava um raster no formato binário BTDR

    Formato: 4 bytes mágicos "BTDR", u32 altura, u32 largura (little-endian),
    seguido de altura*largura float32 little-endian em ordem de linhas.
    Pixels ausentes são gravados como NaN.

    Args:
        raster: Raster a gravar
        path: Caminho do arquivo

    Returns:
        Caminho gravado
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    header = np.array([(BTDR_MAGIC, raster.height, raster.width)], dtype=BTDR_HEADER)
    payload = np.where(raster.missing, np.nan, raster.values).astype("<f4")

    with path.open("wb") as handle:
        handle.write(header.tobytes())
        handle.write(payload.tobytes())

    return path


def read_btdr(path: str | Path, band: int) -> ChannelRaster:
    """Lê um arquivo BTDR de uma banda"""
    path = Path(path)
    raw = path.read_bytes()

    if len(raw) < BTDR_HEADER.itemsize:
        raise InvalidRasterError(f"{path}: truncated BTDR header", path=str(path))

    header = np.frombuffer(raw, dtype=BTDR_HEADER, count=1)[0]
    if header["magic"] != BTDR_MAGIC:
        raise InvalidRasterError(f"{path}: bad magic bytes {header['magic']!r}", path=str(path))

    height, width = int(header["height"]), int(header["width"])
    expected = height * width * 4
    payload = raw[BTDR_HEADER.itemsize:]
    if len(payload) != expected:
        raise InvalidRasterError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}",
            path=str(path)
        )

    values = np.frombuffer(payload, dtype="<f4").reshape(height, width).astype(np.float32)
    return ChannelRaster(values=values, band_id=band, wavelength_um=wavelength_for_band(band))


def _load_btdr_pair(directory: Path, band_a: int, band_b: int) -> Tuple[ChannelRaster, ChannelRaster]:
    rasters = []
    for band in (band_a, band_b):
        band_file = directory / f"C{band:02d}.btdr"
        if not band_file.exists():
            raise BandNotFoundError(band, str(directory))
        rasters.append(read_btdr(band_file, band))
    return rasters[0], rasters[1]


def _load_netcdf_pair(path: Path, band_a: int, band_b: int) -> Tuple[ChannelRaster, ChannelRaster]:
    rasters = []
    with xr.open_dataset(path, mask_and_scale=True) as ds:
        for band in (band_a, band_b):
            var_name = f"CMI_C{band:02d}"
            if var_name not in ds:
                raise BandNotFoundError(band, str(path))

            values = np.asarray(ds[var_name].values, dtype=np.float32)

            wavelength_var = f"band_wavelength_C{band:02d}"
            if wavelength_var in ds:
                wavelength = float(np.asarray(ds[wavelength_var].values).ravel()[0])
            else:
                wavelength = wavelength_for_band(band)

            rasters.append(ChannelRaster(values=values, band_id=band, wavelength_um=wavelength))
    return rasters[0], rasters[1]


def load_scene(path: str | Path, band_a: int = 13, band_b: int = 15) -> Tuple[ChannelRaster, ChannelRaster]:
    """
    Carrega duas bandas de uma cena pré-baixada

    Aceita um arquivo NetCDF GOES L2 (variáveis CMI_Cxx) ou um diretório com
    arquivos BTDR `C13.btdr` / `C15.btdr`.

    Args:
        path: Arquivo NetCDF ou diretório BTDR
        band_a: Primeira banda
        band_b: Segunda banda

    Returns:
        Par de rasters com o mesmo formato
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"Cena não encontrada: {path}")
        raise SceneFileNotFoundError(f"scene file not found: {path}", path=str(path))

    if path.is_dir():
        raster_a, raster_b = _load_btdr_pair(path, band_a, band_b)
    else:
        raster_a, raster_b = _load_netcdf_pair(path, band_a, band_b)

    if raster_a.values.shape != raster_b.values.shape:
        logger.error(
            f"Bandas com formatos diferentes em {path}: "
            f"{raster_a.values.shape} vs {raster_b.values.shape}"
        )
        raise ShapeMismatchError("scene bands", raster_a.values.shape, raster_b.values.shape, band=band_b)

    n_missing = int(raster_a.missing.sum() + raster_b.missing.sum())
    if n_missing:
        logger.warning(f"Cena {path.name}: {n_missing} pixels sem dado")

    logger.info(f"Cena carregada: {path.name} bandas {band_a}/{band_b} ({raster_a.height}x{raster_a.width})")
    return raster_a, raster_b
