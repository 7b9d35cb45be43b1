"""Avaliação por cena de um checkpoint sobre o manifesto"""

from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from loguru import logger
from tqdm import tqdm

from ..data import eval_frame
from ..exceptions import ConfigError, EmptyDatasetError
from ..ingest import LabeledScene, load_split, read_manifest
from ..losses import iou_metric
from ..model import SegmentationModel, load_checkpoint

EVALUATION_FILE = "evaluation.csv"


def evaluate_scenes(
    model: Optional[torch.nn.Module],
    scenes: Sequence[LabeledScene],
    out_size: int,
    threshold: float = 0.5,
    device: str = "cpu"
) -> pd.DataFrame:
    """
    IoU por cena sobre quadros centrais sem augmentação

    Args:
        model: Modelo em modo eval; None usa a própria máscara como predição
        scenes: Cenas a avaliar
        out_size: Tamanho do recorte central
        threshold: Limiar de binarização das probabilidades
        device: Dispositivo torch

    Returns:
        DataFrame (scene_id, iou)
    """
    rows: List[dict] = []
    if model is not None:
        model.eval()

    for scene in tqdm(scenes, desc="Avaliando cenas", disable=len(scenes) < 2):
        image, mask = eval_frame(scene, out_size)
        target = torch.from_numpy(mask.astype(np.float32))
        if model is None:
            prediction = target
        else:
            with torch.no_grad():
                batch = torch.from_numpy(image.astype(np.float32))[None, None].to(device)
                prediction = torch.sigmoid(model(batch))[0, 0].cpu()
        iou = iou_metric(prediction, target, threshold)
        rows.append({"scene_id": scene.scene_id, "iou": iou})
        logger.debug(f"{scene.scene_id}: IoU {iou:.4f}")

    return pd.DataFrame(rows, columns=["scene_id", "iou"])


def evaluate(
    checkpoint: Optional[str | Path],
    manifest: str | Path,
    out_dir: str | Path,
    out_size: Optional[int] = None,
    threshold: float = 0.5,
    split: Optional[str] = "eval",
    oracle: bool = False,
    device: str = "cpu"
) -> pd.DataFrame:
    """
    Avalia um checkpoint e grava a tabela de IoU

    Args:
        checkpoint: Checkpoint .pt (ignorado no modo oráculo)
        manifest: Manifesto de cenas
        out_dir: Diretório onde `evaluation.csv` é gravado
        out_size: Recorte central (padrão: tamanho de treino do checkpoint)
        threshold: Limiar de binarização
        split: Partição avaliada (None = todas)
        oracle: Usa a máscara verdadeira como predição
        device: Dispositivo torch

    Returns:
        Tabela por cena com a linha final `mean`
    """
    model: Optional[SegmentationModel] = None
    if not oracle:
        if checkpoint is None:
            raise ConfigError("evaluate requires a checkpoint unless oracle mode is enabled")
        model, _, sidecar = load_checkpoint(checkpoint, map_location=device)
        out_size = out_size or sidecar.get("out_size")
    if out_size is None:
        raise ConfigError("out_size is required when the checkpoint does not record it")

    scenes = load_split(read_manifest(manifest), split)
    if not scenes:
        logger.error(f"Nenhuma cena da partição '{split}' em {manifest}")
        raise EmptyDatasetError(f"no scenes for split '{split}' in {manifest}", manifest=str(manifest))

    table = evaluate_scenes(model, scenes, out_size, threshold, device)
    mean_iou = float(table["iou"].mean())
    table = pd.concat([table, pd.DataFrame([{"scene_id": "mean", "iou": mean_iou}])], ignore_index=True)

    out_path = Path(out_dir) / EVALUATION_FILE
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False)

    logger.info(f"Avaliação de {len(scenes)} cenas: IoU médio {mean_iou:.4f} ({out_path})")
    return table
