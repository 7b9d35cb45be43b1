"""Treino, avaliação, inferência e diagnósticos"""

from .comparison import compare_losses
from .diagnostics import HoughDiagnostics, diagnose_hough, plot_metrics
from .evaluator import evaluate, evaluate_scenes
from .metrics_log import MetricRecord, append_records, read_metrics
from .predictor import overlay_mask, predict, predict_array, window_starts
from .trainer import Trainer, TrainState, evaluate_frames, train

__all__ = [
    "HoughDiagnostics",
    "MetricRecord",
    "TrainState",
    "Trainer",
    "append_records",
    "compare_losses",
    "diagnose_hough",
    "evaluate",
    "evaluate_frames",
    "evaluate_scenes",
    "overlay_mask",
    "plot_metrics",
    "predict",
    "predict_array",
    "read_metrics",
    "train",
    "window_starts",
]
