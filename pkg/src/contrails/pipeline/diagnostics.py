"""Figuras de diagnóstico: painéis de Hough e curvas de IoU"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from loguru import logger  # noqa: E402

from ..config import HoughSettings  # noqa: E402
from ..exceptions import MetricsLogError, ShapeMismatchError  # noqa: E402
from ..hough import HoughAccumulator, LineSet, build_grid, extract_lines, render_lines, soft_accumulate  # noqa: E402
from ..ingest import read_grayscale  # noqa: E402
from .metrics_log import read_metrics  # noqa: E402

HOUGH_FIGURE = "hough_diagnostics.png"
METRICS_FIGURE = "iou_curves.png"


@dataclass
class HoughDiagnostics:
    """Retas extraídas dos dois lados e a figura gravada"""
    target_lines: LineSet
    prediction_lines: LineSet
    target_accumulator: np.ndarray
    prediction_accumulator: np.ndarray
    figure_path: Path


def _as_mask(source) -> np.ndarray:
    if isinstance(source, (str, Path)):
        return read_grayscale(source)
    return np.asarray(source, dtype=np.float64)


def _lines_for(mask: np.ndarray, settings: HoughSettings):
    grid = build_grid(mask.shape[0], mask.shape[1], settings.n_theta, settings.rho_resolution)
    acc: HoughAccumulator = soft_accumulate(mask, grid, eps=settings.eps)
    lines = extract_lines(acc, settings.threshold, settings.nms_radius, settings.min_line_length)
    return acc, lines


def _hough_panel(ax, acc: HoughAccumulator, lines: LineSet, title: str) -> None:
    grid = acc.grid
    extent = (0.0, 180.0, grid.rho_values[-1], grid.rho_values[0])
    ax.imshow(acc.numpy(), aspect="auto", cmap="magma", extent=extent, vmin=0.0, vmax=1.0)
    if len(lines):
        ax.scatter([np.degrees(line.theta) for line in lines], [line.rho for line in lines],
                   s=30, facecolors="none", edgecolors="cyan")
    ax.set_xlabel("θ (graus)")
    ax.set_ylabel("ρ (px)")
    ax.set_title(title)


def diagnose_hough(
    target,
    prediction,
    out_dir: str | Path,
    settings: Optional[HoughSettings] = None
) -> HoughDiagnostics:
    """
    Figura de seis painéis comparando máscara alvo e predição no espaço de Hough

    Painéis: máscara alvo, retas do alvo, Hough do alvo, máscara predita,
    retas da predição, Hough da predição.

    Args:
        target: Máscara alvo (array ou caminho PNG)
        prediction: Máscara ou probabilidades preditas (array ou caminho PNG)
        out_dir: Diretório de saída
        settings: Parâmetros de Hough

    Returns:
        Retas extraídas, acumuladores e caminho da figura
    """
    settings = settings or HoughSettings()
    target_mask, prediction_mask = _as_mask(target), _as_mask(prediction)
    if target_mask.shape != prediction_mask.shape:
        raise ShapeMismatchError("diagnostic masks", target_mask.shape, prediction_mask.shape)

    target_acc, target_lines = _lines_for(target_mask, settings)
    prediction_acc, prediction_lines = _lines_for(prediction_mask, settings)
    height, width = target_mask.shape

    fig, axes = plt.subplots(2, 3, figsize=(15, 9))
    rows = (
        ("Alvo", target_mask, target_acc, target_lines),
        ("Predição", prediction_mask, prediction_acc, prediction_lines),
    )
    for row, (label, mask, acc, lines) in zip(axes, rows):
        row[0].imshow(mask, cmap="gray", vmin=0.0, vmax=1.0)
        row[0].set_title(f"{label}: máscara")
        row[1].imshow(render_lines(lines, height, width), cmap="gray", vmin=0, vmax=1)
        row[1].set_title(f"{label}: {len(lines)} retas")
        _hough_panel(row[2], acc, lines, f"{label}: espaço de Hough")
        for ax in row[:2]:
            ax.set_axis_off()

    fig.tight_layout()
    out_path = Path(out_dir) / HOUGH_FIGURE
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=100)
    plt.close(fig)

    logger.info(f"Diagnóstico de Hough: {len(target_lines)} retas no alvo, "
                f"{len(prediction_lines)} na predição -> {out_path}")
    return HoughDiagnostics(target_lines, prediction_lines, target_acc.numpy(), prediction_acc.numpy(), out_path)


def plot_metrics(log_paths: Sequence[str | Path], out_dir: str | Path) -> Path:
    """
    Curvas de IoU de treino e validação por execução

    Cada execução é identificada pelo diretório do seu log.

    Args:
        log_paths: Um ou mais logs JSON Lines
        out_dir: Diretório de saída

    Returns:
        Caminho de `iou_curves.png`
    """
    if not log_paths:
        raise MetricsLogError("at least one metrics log is required")

    fig, ax = plt.subplots(figsize=(9, 5))
    for path in log_paths:
        path = Path(path)
        frame = read_metrics(path)
        run_name = path.parent.name or path.stem
        for split, style in (("train", "--"), ("val", "-")):
            curve = frame[frame["split"] == split].sort_values("step")
            if not curve.empty:
                ax.plot(curve["step"], curve["iou"], style, label=f"{run_name} ({split})")

    ax.set_xlabel("Passo")
    ax.set_ylabel("IoU")
    ax.set_ylim(0.0, 1.0)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()

    out_path = Path(out_dir) / METRICS_FIGURE
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=100)
    plt.close(fig)

    logger.info(f"Curvas de IoU de {len(log_paths)} execuções -> {out_path}")
    return out_path
