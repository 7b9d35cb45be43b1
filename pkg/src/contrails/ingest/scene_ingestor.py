"""Pipeline de ingestão: cena bruta -> BTD normalizado -> cena rotulada"""

from pathlib import Path
from typing import Any, Dict, Optional

from loguru import logger

from ..config import IngestSettings
from .btd_processor import compute_btd, normalize
from .labeled_scene import SplitTag, pair_with_mask, save_labeled_scene
from .manifest import append_manifest
from .scene_loader import load_scene


class SceneIngestor:
    """Converte cenas de duas bandas em cenas rotuladas prontas para treino"""

    def __init__(self, settings: Optional[IngestSettings] = None):
        """
        Inicializa o ingestor

        Args:
            settings: Configurações de ingestão (bandas e percentis)
        """
        self.settings = settings or IngestSettings()

    def ingest_scene(
        self,
        scene_path: str | Path,
        mask_path: str | Path,
        scene_id: str,
        split: SplitTag,
        out_dir: str | Path,
        manifest_path: Optional[str | Path] = None
    ) -> Dict[str, Any]:
        """
        Processa uma cena completa e registra no manifesto

        Args:
            scene_path: NetCDF ou diretório BTDR
            mask_path: Máscara PNG rotulada
            scene_id: Identificador da cena
            split: "train" ou "eval"
            out_dir: Diretório de saída das cenas rotuladas
            manifest_path: Manifesto a atualizar (opcional)

        Returns:
            Estatísticas da ingestão
        """
        logger.info(f"Ingerindo cena {scene_id} ({split})")

        c13, c15 = load_scene(scene_path, self.settings.band_a, self.settings.band_b)
        btd = compute_btd(c13, c15)
        normalized = normalize(btd, self.settings.lo_percentile, self.settings.hi_percentile)

        scene = pair_with_mask(normalized.values, mask_path, scene_id=scene_id, split_tag=split)
        paths = save_labeled_scene(scene, out_dir, normalization=normalized)

        if manifest_path is not None:
            append_manifest(manifest_path, scene_id, paths["image"], paths["mask"], split)

        stats = {
            "scene_id": scene_id,
            "split": split,
            "shape": scene.shape,
            "contrail_pixels": int(scene.mask.sum()),
            "invalid_pixels": int((~btd.valid_mask).sum()),
            "degenerate": normalized.degenerate,
            **{key: str(value) for key, value in paths.items()},
        }
        logger.info(f"Cena {scene_id} ingerida: {stats['contrail_pixels']} pixels de contrail")
        return stats
