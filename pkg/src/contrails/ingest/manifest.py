"""Manifesto de dados: uma cena rotulada por linha"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import pandas as pd
from loguru import logger

from ..exceptions import ManifestError
from .labeled_scene import MASK_THRESHOLD, LabeledScene, read_grayscale

MANIFEST_COLUMNS = ["scene_id", "image_path", "mask_path", "split"]


@dataclass
class ManifestEntry:
    """Linha do manifesto com caminhos já resolvidos"""
    scene_id: str
    image_path: Path
    mask_path: Path
    split: str

    def load(self) -> LabeledScene:
        """Carrega a cena rotulada desta linha"""
        image = read_grayscale(self.image_path)
        mask = (read_grayscale(self.mask_path) >= MASK_THRESHOLD).astype("uint8")
        return LabeledScene(image=image, mask=mask, scene_id=self.scene_id, split_tag=self.split)


def read_manifest(path: str | Path) -> List[ManifestEntry]:
    """
    Lê o manifesto separado por tabulações

    Formato: `scene_id<TAB>image_path<TAB>mask_path<TAB>split`, linhas com `#`
    são comentários e caminhos relativos são resolvidos a partir do diretório
    do manifesto.

    Args:
        path: Caminho do manifesto

    Returns:
        Lista de entradas
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"Manifesto não encontrado: {path}")
        raise ManifestError(f"manifest not found: {path}", path=str(path))

    try:
        frame = pd.read_csv(path, sep="\t", comment="#", header=None, names=MANIFEST_COLUMNS,
                            dtype=str, skip_blank_lines=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ManifestError(f"malformed manifest {path}: {e}", path=str(path)) from e

    if frame.isna().any().any():
        bad = frame[frame.isna().any(axis=1)].index.tolist()
        raise ManifestError(f"manifest {path}: incomplete rows {bad}", path=str(path))

    unknown = set(frame["split"]) - {"train", "eval"}
    if unknown:
        raise ManifestError(f"manifest {path}: unknown split tags {sorted(unknown)}", path=str(path))

    base = path.parent
    entries = [
        ManifestEntry(
            scene_id=row.scene_id,
            image_path=_resolve(base, row.image_path),
            mask_path=_resolve(base, row.mask_path),
            split=row.split
        )
        for row in frame.itertuples(index=False)
    ]

    logger.info(f"Manifesto {path.name}: {len(entries)} cenas")
    return entries


def _resolve(base: Path, value: str) -> Path:
    candidate = Path(value)
    return candidate if candidate.is_absolute() else base / candidate


def append_manifest(path: str | Path, scene_id: str, image_path: str | Path, mask_path: str | Path,
                    split: str) -> None:
    """Acrescenta uma cena ao manifesto, criando-o se necessário"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def _rel(p) -> str:
        p = Path(p)
        try:
            return str(p.resolve().relative_to(path.parent.resolve()))
        except ValueError:
            return str(p.resolve())

    header = "" if path.exists() else "# scene_id\timage_path\tmask_path\tsplit\n"
    with path.open("a", encoding="utf-8") as handle:
        handle.write(header + f"{scene_id}\t{_rel(image_path)}\t{_rel(mask_path)}\t{split}\n")


def load_split(entries: List[ManifestEntry], split: Optional[str] = None) -> List[LabeledScene]:
    """Carrega as cenas de uma partição (None = todas)"""
    return [entry.load() for entry in entries if split is None or entry.split == split]
