"""Losses de segmentação e métrica IoU"""

from .segmentation_losses import (
    PROB_EPS,
    clamp_probabilities,
    dice_loss,
    focal_loss,
    get_loss,
    hough_dice_loss,
    iou_metric,
    log_dice_loss,
    sr_loss,
    sr_loss_terms,
)

__all__ = [
    "PROB_EPS",
    "clamp_probabilities",
    "dice_loss",
    "focal_loss",
    "get_loss",
    "hough_dice_loss",
    "iou_metric",
    "log_dice_loss",
    "sr_loss",
    "sr_loss_terms",
]
