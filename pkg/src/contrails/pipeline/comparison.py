"""Comparação de losses: uma execução por loss com o mesmo conjunto de dados"""

from pathlib import Path
from typing import Sequence

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from ..config import RunConfig, Settings
from ..exceptions import ConfigError
from .diagnostics import plot_metrics
from .metrics_log import read_metrics
from .trainer import METRICS_FILE, train

SUMMARY_FILE = "loss_comparison.csv"


def compare_losses(settings: Settings, loss_ids: Sequence[str], out_dir: str | Path) -> pd.DataFrame:
    """
    Treina uma execução por loss e resume o IoU de validação

    O orçamento de passos é o padrão de cada loss, a menos que run.steps
    esteja definido.

    Args:
        settings: Configurações base
        loss_ids: Losses a comparar
        out_dir: Diretório raiz; cada execução grava em `<out_dir>/<loss_id>`

    Returns:
        Tabela (loss_id, steps, final_val_iou, best_val_iou, best_step)
    """
    out_dir = Path(out_dir)
    rows, logs = [], []

    for loss_id in loss_ids:
        try:
            run = RunConfig.model_validate({
                **settings.run.model_dump(),
                "loss_id": loss_id,
                "output_dir": str(out_dir / loss_id),
            })
        except ValidationError as e:
            raise ConfigError(f"invalid run for loss '{loss_id}': {e}", loss_id=loss_id) from e
        logger.info(f"Comparação: iniciando execução '{loss_id}' ({run.total_steps} passos)")
        train(settings.model_copy(update={"run": run}))

        log_path = out_dir / loss_id / METRICS_FILE
        logs.append(log_path)
        val = read_metrics(log_path)
        val = val[val["split"] == "val"].sort_values("step")
        best = val.loc[val["iou"].idxmax()]
        rows.append({
            "loss_id": loss_id,
            "steps": run.total_steps,
            "final_val_iou": float(val["iou"].iloc[-1]),
            "best_val_iou": float(best["iou"]),
            "best_step": int(best["step"]),
        })

    summary = pd.DataFrame(rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary.to_csv(out_dir / SUMMARY_FILE, index=False)
    plot_metrics(logs, out_dir)

    logger.info(f"Comparação concluída:\n{summary.to_string(index=False)}")
    return summary
