"""
Orquestrador do toolkit de segmentação de contrails

Este módulo reúne as etapas do fluxo completo:
1. Ingestão de cenas de satélite (BTD normalizado + máscara rotulada)
2. Treino da ResUNet com a loss escolhida
3. Avaliação por cena (IoU)
4. Inferência em imagens de qualquer tamanho
5. Diagnósticos no espaço de Hough e curvas de treino
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from loguru import logger

from .config import Settings, get_settings
from .ingest import SceneIngestor, read_grayscale
from .model import load_checkpoint
from .pipeline import (
    HoughDiagnostics,
    TrainState,
    compare_losses,
    diagnose_hough,
    evaluate,
    plot_metrics,
    predict,
    predict_array,
    train,
)
from .utils.logger_config import setup_logger


class ContrailPipeline:
    """
    Ponto de entrada único para as operações do toolkit

    Cada método delega para o módulo correspondente usando as configurações
    carregadas na criação do pipeline.
    """

    def __init__(self, settings: Optional[Settings] = None):
        """
        Inicializa o pipeline

        Args:
            settings: Configurações do sistema (padrão: ambiente/.env)
        """
        self.settings = settings or get_settings()

        setup_logger(self.settings.logging)

        logger.info("=" * 80)
        logger.info("Inicializando ContrailPipeline")
        logger.info("=" * 80)

        self.ingestor = SceneIngestor(self.settings.ingest)

        run = self.settings.run
        logger.info("Configuração:")
        logger.info(f"  - Bandas: C{self.settings.ingest.band_a:02d} / C{self.settings.ingest.band_b:02d}")
        logger.info(f"  - Encoder: {self.settings.model.encoder_variant} (profundidade {self.settings.model.encoder_depth})")
        logger.info(f"  - Loss: {run.loss_id} ({run.total_steps} passos)")
        logger.info(f"  - Manifesto: {run.manifest_path}")
        logger.info(f"  - Saída: {run.output_dir}")

    def ingest(
        self,
        scene_path: str | Path,
        mask_path: str | Path,
        scene_id: str,
        split: str = "train",
        out_dir: Optional[str | Path] = None,
        manifest_path: Optional[str | Path] = None
    ) -> Dict[str, Any]:
        """
        Ingere uma cena e registra no manifesto

        Args:
            scene_path: NetCDF ou diretório BTDR
            mask_path: Máscara PNG
            scene_id: Identificador da cena
            split: "train" ou "eval"
            out_dir: Diretório das cenas rotuladas (padrão: diretório do manifesto)
            manifest_path: Manifesto (padrão: run.manifest_path)

        Returns:
            Estatísticas da ingestão
        """
        manifest_path = Path(manifest_path or self.settings.run.manifest_path)
        out_dir = Path(out_dir) if out_dir is not None else manifest_path.parent
        return self.ingestor.ingest_scene(scene_path, mask_path, scene_id, split, out_dir, manifest_path)

    def train(self, resume_from: Optional[str | Path] = None) -> TrainState:
        """Treina conforme run.*; retoma de um checkpoint quando informado"""
        return train(self.settings, resume_from=resume_from)

    def evaluate(
        self,
        checkpoint: Optional[str | Path],
        manifest: Optional[str | Path] = None,
        out_dir: Optional[str | Path] = None,
        oracle: bool = False
    ) -> pd.DataFrame:
        """Tabela de IoU por cena da partição de avaliação"""
        run = self.settings.run
        return evaluate(
            checkpoint,
            manifest or run.manifest_path,
            out_dir or run.output_dir,
            out_size=None if checkpoint and not oracle else self.settings.augmentation.out_size,
            threshold=run.eval_threshold,
            oracle=oracle,
            device=run.device
        )

    def predict(self, checkpoint: str | Path, image_path: str | Path,
                out_dir: Optional[str | Path] = None) -> Dict[str, Path]:
        """Máscara e sobreposição de uma imagem"""
        run = self.settings.run
        return predict(checkpoint, image_path, out_dir or run.output_dir,
                       threshold=run.eval_threshold, device=run.device)

    def diagnose_hough(
        self,
        target_mask: str | Path,
        out_dir: Optional[str | Path] = None,
        prediction_mask: Optional[str | Path] = None,
        checkpoint: Optional[str | Path] = None,
        image_path: Optional[str | Path] = None
    ) -> HoughDiagnostics:
        """
        Diagnóstico de Hough entre a máscara alvo e uma predição

        A predição vem de uma máscara PNG ou do checkpoint aplicado à imagem.
        """
        if prediction_mask is not None:
            prediction = prediction_mask
        elif checkpoint is not None and image_path is not None:
            model, _, sidecar = load_checkpoint(checkpoint, map_location=self.settings.run.device)
            tile = sidecar.get("out_size") or self.settings.augmentation.out_size
            prediction = predict_array(model, read_grayscale(image_path).astype("float32"), int(tile),
                                       device=self.settings.run.device)
        else:
            prediction = target_mask
            logger.warning("Sem predição informada: comparando a máscara alvo com ela mesma")

        return diagnose_hough(target_mask, prediction, out_dir or self.settings.run.output_dir,
                              self.settings.sr.hough)

    def plot_metrics(self, log_paths: Sequence[str | Path], out_dir: Optional[str | Path] = None) -> Path:
        """Curvas de IoU de uma ou mais execuções"""
        return plot_metrics(log_paths, out_dir or self.settings.run.output_dir)

    def compare_losses(self, loss_ids: List[str], out_dir: Optional[str | Path] = None) -> pd.DataFrame:
        """Uma execução de treino por loss com resumo comparativo"""
        return compare_losses(self.settings, loss_ids, out_dir or self.settings.run.output_dir)
