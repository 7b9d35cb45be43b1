"""
Losses de segmentação sobre mapas de probabilidade

Todas as losses recebem probabilidades p (pós-logística) e a máscara binária g
com o mesmo formato e são minimizadas (valor 0) na predição perfeita. As somas
de Dice são feitas sobre todos os pixels do batch com suavização +1.
"""

from functools import lru_cache
from typing import Callable, Dict, Optional

import torch

from ..config import FocalConfig, HoughSettings, LossId, Settings, SRLossConfig
from ..exceptions import ConfigError, ShapeMismatchError
from ..hough import HoughGrid, build_grid, soft_accumulate, squash

PROB_EPS = 1e-7

LossFn = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


def _check_shapes(p: torch.Tensor, g: torch.Tensor) -> None:
    if p.shape != g.shape:
        raise ShapeMismatchError("prediction vs mask", tuple(g.shape), tuple(p.shape))


def clamp_probabilities(p: torch.Tensor) -> torch.Tensor:
    """Restringe p a [ε, 1 − ε]"""
    return p.clamp(PROB_EPS, 1.0 - PROB_EPS)


def focal_loss(p: torch.Tensor, g: torch.Tensor, cfg: Optional[FocalConfig] = None) -> torch.Tensor:
    """
    Focal loss: média de −(1 − p_t)^γ · log(p_t)

    Args:
        p: Probabilidades
        g: Máscara binária
        cfg: Configuração (γ)

    Returns:
        Escalar
    """
    _check_shapes(p, g)
    gamma = (cfg or FocalConfig()).gamma
    p = clamp_probabilities(p)
    g = g.to(p.dtype)
    p_t = g * p + (1 - g) * (1 - p)
    return (-(1 - p_t).pow(gamma) * torch.log(p_t)).mean()


def _dice_ratio(p: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    g = g.to(p.dtype)
    return (2 * (g * p).sum() + 1) / (g.sum() + p.sum() + 1)


def dice_loss(p: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    """1 − (2Σgp + 1) / (Σg + Σp + 1), somas sobre o batch inteiro"""
    _check_shapes(p, g)
    return 1 - _dice_ratio(p, g)


def log_dice_loss(p: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    """−log do coeficiente de Dice suavizado"""
    _check_shapes(p, g)
    return -torch.log(_dice_ratio(p, g))


@lru_cache(maxsize=16)
def _grid_for(height: int, width: int, n_theta: int, rho_resolution: float) -> HoughGrid:
    return build_grid(height, width, n_theta, rho_resolution)


def _hough_presence(mask: torch.Tensor, hough: HoughSettings) -> torch.Tensor:
    height, width = mask.shape[-2:]
    grid = _grid_for(int(height), int(width), hough.n_theta, hough.rho_resolution)
    acc = soft_accumulate(mask, grid, eps=hough.eps)
    return squash(acc, tau=hough.tau, beta=hough.beta).values


def hough_dice_loss(p_h: torch.Tensor, g_h: torch.Tensor) -> torch.Tensor:
    """
    Dice entre mapas de presença de retas: 1 − (2Σab + 1) / (Σa² + Σb² + 1)

    Coincide com dice_loss em mapas binários e vale 0 para mapas suaves
    idênticos (o squash nunca chega a 0 nem a 1).
    """
    _check_shapes(p_h, g_h)
    g_h = g_h.to(p_h.dtype)
    return 1 - (2 * (p_h * g_h).sum() + 1) / ((p_h * p_h).sum() + (g_h * g_h).sum() + 1)


def sr_loss_terms(p: torch.Tensor, g: torch.Tensor, cfg: Optional[SRLossConfig] = None) -> Dict[str, torch.Tensor]:
    """
    Termos da SR Loss separados

    Returns:
        {"pixel": Dice em pixels, "hough": Dice entre mapas de Hough, "total": combinação}
    """
    _check_shapes(p, g)
    cfg = cfg or SRLossConfig()
    pixel = dice_loss(p, g)
    if cfg.alpha == 1.0:
        return {"pixel": pixel, "hough": torch.zeros_like(pixel), "total": pixel}

    g = g.to(p.dtype)
    hough = hough_dice_loss(_hough_presence(p, cfg.hough), _hough_presence(g, cfg.hough))
    total = cfg.alpha * pixel + (1 - cfg.alpha) * hough
    return {"pixel": pixel, "hough": hough, "total": total}


def sr_loss(p: torch.Tensor, g: torch.Tensor, cfg: Optional[SRLossConfig] = None) -> torch.Tensor:
    """
    SR Loss: α · Dice(p, g) + (1 − α) · Dice_H(squash(H(p)), squash(H(g)))

    H é a transformada de Hough suave e Dice_H é hough_dice_loss; a loss é
    diferenciável em p.
    """
    return sr_loss_terms(p, g, cfg)["total"]


def iou_metric(p: torch.Tensor, g: torch.Tensor, threshold: float = 0.5) -> float:
    """
    IoU entre p binarizado no limiar e g

    Returns:
        |p ∧ g| / |p ∨ g|, ou 1.0 quando ambos são vazios
    """
    _check_shapes(p, g)
    predicted = p >= threshold
    target = g > 0.5
    union = (predicted | target).sum().item()
    if union == 0:
        return 1.0
    return (predicted & target).sum().item() / union


def get_loss(loss_id: LossId, settings: Optional[Settings] = None) -> LossFn:
    """
    Retorna a loss configurada como função de (logits, alvo)

    Args:
        loss_id: "dice", "logdice", "focal" ou "sr"
        settings: Configurações (focal e sr)

    Returns:
        Função que aplica a logística aos logits e calcula a loss
    """
    settings = settings or Settings()
    losses: Dict[str, Callable[[torch.Tensor, torch.Tensor], torch.Tensor]] = {
        "dice": dice_loss,
        "logdice": log_dice_loss,
        "focal": lambda p, g: focal_loss(p, g, settings.focal),
        "sr": lambda p, g: sr_loss(p, g, settings.sr),
    }
    if loss_id not in losses:
        raise ConfigError(f"unknown loss '{loss_id}' (available: {sorted(losses)})", loss_id=loss_id)

    loss = losses[loss_id]

    def from_logits(logits: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return loss(torch.sigmoid(logits), target.to(logits.dtype))

    from_logits.__name__ = f"{loss_id}_loss"
    return from_logits
