"""Pareamento de imagens BTD com máscaras rotuladas e persistência"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Literal, Optional

import numpy as np
from loguru import logger
from PIL import Image, UnidentifiedImageError

from ..exceptions import DataError, MaskDecodeError, ShapeMismatchError
from .btd_processor import NormalizedImage

SplitTag = Literal["train", "eval"]

MASK_THRESHOLD = 0.5

# Faixa dinâmica por modo PIL
_DYNAMIC_RANGE = {"1": 1.0, "L": 255.0, "P": 255.0, "I;16": 65535.0, "I;16B": 65535.0, "I;16L": 65535.0, "I": 65535.0}


@dataclass
class LabeledScene:
    """
    Imagem normalizada pareada com sua máscara de contrails

    A máscara segue a convenção de rotulagem com traços de aproximadamente
    dois pixels de largura; a largura não é verificada.
    """
    image: np.ndarray
    mask: np.ndarray
    scene_id: str
    split_tag: SplitTag = "train"

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float32)
        self.mask = np.asarray(self.mask, dtype=np.uint8)

        if self.image.shape != self.mask.shape:
            raise ShapeMismatchError(f"scene {self.scene_id}", self.image.shape, self.mask.shape)
        if self.image.size and (self.image.min() < 0.0 or self.image.max() > 1.0):
            raise DataError(f"scene {self.scene_id}: image values outside [0, 1]", scene_id=self.scene_id)
        if not np.isin(self.mask, (0, 1)).all():
            raise DataError(f"scene {self.scene_id}: mask values outside {{0, 1}}", scene_id=self.scene_id)
        if self.split_tag not in ("train", "eval"):
            raise DataError(f"scene {self.scene_id}: unknown split '{self.split_tag}'", scene_id=self.scene_id)

    @property
    def shape(self):
        return self.image.shape


def read_grayscale(path: str | Path) -> np.ndarray:
    """
    Lê uma imagem como array em [0, 1] usando a faixa dinâmica do arquivo

    Imagens coloridas são convertidas para luminância.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in _DYNAMIC_RANGE:
                img = img.convert("L")
            dynamic_range = _DYNAMIC_RANGE[img.mode]
            array = np.asarray(img).astype(np.float64)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        logger.error(f"Erro ao ler imagem {path}: {e}")
        raise MaskDecodeError(f"unreadable image {path}: {e}", path=str(path)) from e

    if array.ndim != 2:
        raise MaskDecodeError(f"{path}: expected a single-channel image", path=str(path))

    return array / dynamic_range


def pair_with_mask(image: np.ndarray, mask_path: str | Path, scene_id: Optional[str] = None,
                   split_tag: SplitTag = "train") -> LabeledScene:
    """
    Pareia uma imagem normalizada com a máscara PNG rotulada

    Args:
        image: Imagem em [0, 1]
        mask_path: PNG em tons de cinza (8 ou 16 bits)
        scene_id: Identificador da cena (padrão: nome do arquivo)
        split_tag: "train" ou "eval"

    Returns:
        Cena rotulada com máscara binarizada em 0.5 da faixa dinâmica
    """
    mask_path = Path(mask_path)
    levels = read_grayscale(mask_path)

    if levels.shape != image.shape:
        logger.error(f"Máscara {mask_path.name} {levels.shape} incompatível com imagem {image.shape}")
        raise ShapeMismatchError(f"mask {mask_path.name}", image.shape, levels.shape)

    mask = (levels >= MASK_THRESHOLD).astype(np.uint8)
    scene = LabeledScene(
        image=image,
        mask=mask,
        scene_id=scene_id or mask_path.stem,
        split_tag=split_tag
    )

    logger.debug(f"Cena {scene.scene_id}: {int(mask.sum())} pixels de contrail")
    return scene


def save_labeled_scene(scene: LabeledScene, out_dir: str | Path,
                       normalization: Optional[NormalizedImage] = None) -> Dict[str, Path]:
    """
    Persiste a cena: imagem PNG 16 bits, máscara PNG e metadados chave = valor

    Args:
        scene: Cena rotulada
        out_dir: Diretório de saída
        normalization: Parâmetros de normalização para o arquivo de metadados

    Returns:
        Caminhos gravados (image, mask, meta)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    image_path = out_dir / f"{scene.scene_id}_image.png"
    mask_path = out_dir / f"{scene.scene_id}_mask.png"
    meta_path = out_dir / f"{scene.scene_id}.meta"

    image16 = np.round(scene.image.astype(np.float64) * 65535.0).astype(np.uint16)
    Image.fromarray(image16).save(image_path)
    Image.fromarray((scene.mask * 255).astype(np.uint8)).save(mask_path)

    meta = {
        "scene_id": scene.scene_id,
        "split_tag": scene.split_tag,
        "height": scene.shape[0],
        "width": scene.shape[1],
    }
    if normalization is not None:
        meta.update(normalization.to_dict())

    lines = ["# contrail labeled scene metadata"] + [f"{key} = {value}" for key, value in meta.items()]
    meta_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    logger.info(f"Cena {scene.scene_id} salva em {out_dir}")
    return {"image": image_path, "mask": mask_path, "meta": meta_path}


def read_meta(meta_path: str | Path) -> Dict[str, str]:
    """Lê um arquivo de metadados chave = valor"""
    meta = {}
    for line in Path(meta_path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{meta_path}: malformed line '{line}'", path=str(meta_path))
        meta[key.strip()] = value.strip()
    return meta


def load_labeled_scene(meta_path: str | Path) -> LabeledScene:
    """Carrega uma cena persistida a partir do seu arquivo .meta"""
    meta_path = Path(meta_path)
    meta = read_meta(meta_path)
    scene_id = meta["scene_id"]

    image = read_grayscale(meta_path.parent / f"{scene_id}_image.png")
    mask = (read_grayscale(meta_path.parent / f"{scene_id}_mask.png") >= MASK_THRESHOLD).astype(np.uint8)

    return LabeledScene(image=image, mask=mask, scene_id=scene_id, split_tag=meta.get("split_tag", "train"))
