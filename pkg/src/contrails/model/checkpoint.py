"""Persistência de checkpoints com metadados JSON"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import torch
from loguru import logger
from pydantic import ValidationError

from ..config import ModelConfig
from ..exceptions import IncompatibleCheckpointError
from .resunet import SegmentationModel, build


def sidecar_path(checkpoint_path: str | Path) -> Path:
    """Arquivo JSON de metadados associado ao checkpoint"""
    return Path(checkpoint_path).with_suffix(".json")


def save_checkpoint(
    path: str | Path,
    model: SegmentationModel,
    step: int,
    seed: int,
    loss_id: str,
    optimizer: Optional[torch.optim.Optimizer] = None,
    history: Optional[list] = None,
    extra: Optional[Dict[str, Any]] = None
) -> Path:
    """
    Grava o checkpoint (.pt) e o sidecar de metadados (.json)

    Args:
        path: Caminho do arquivo .pt
        model: Modelo
        step: Passo de treino
        seed: Semente da execução
        loss_id: Identificador da loss
        optimizer: Otimizador (opcional)
        history: Histórico de métricas
        extra: Campos adicionais para o sidecar

    Returns:
        Caminho do checkpoint
    """
    path = Path(path).with_suffix(".pt")
    path.parent.mkdir(parents=True, exist_ok=True)

    payload = {
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict() if optimizer is not None else None,
        "step": step,
        "history": history or [],
    }
    torch.save(payload, path)

    sidecar = {
        "model_config": model.cfg.model_dump(),
        "step": step,
        "seed": seed,
        "loss_id": loss_id,
        "created_at": datetime.now().isoformat(timespec="seconds"),
        **(extra or {}),
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2), encoding="utf-8")

    logger.debug(f"Checkpoint salvo: {path} (passo {step})")
    return path


def read_sidecar(path: str | Path) -> Dict[str, Any]:
    """Lê o sidecar JSON de um checkpoint"""
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise IncompatibleCheckpointError(f"checkpoint sidecar not found: {meta_path}", path=str(meta_path))
    try:
        return json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IncompatibleCheckpointError(f"malformed checkpoint sidecar {meta_path}: {e}", path=str(meta_path)) from e


def load_checkpoint(
    path: str | Path,
    expected_config: Optional[ModelConfig] = None,
    map_location: str = "cpu"
) -> Tuple[SegmentationModel, Dict[str, Any], Dict[str, Any]]:
    """
    Carrega um checkpoint

    Args:
        path: Caminho do arquivo .pt
        expected_config: Configuração que o checkpoint deve satisfazer
        map_location: Dispositivo de destino

    Returns:
        (modelo em modo eval, payload, sidecar)
    """
    path = Path(path)
    if not path.exists():
        raise IncompatibleCheckpointError(f"checkpoint not found: {path}", path=str(path))

    sidecar = read_sidecar(path)
    try:
        cfg = ModelConfig(**{**sidecar["model_config"], "use_pretrained": False})
    except (KeyError, ValidationError) as e:
        raise IncompatibleCheckpointError(f"invalid model config in {path}: {e}", path=str(path)) from e

    if expected_config is not None:
        ignored = {"use_pretrained", "weights_source"}
        expected = expected_config.model_dump(exclude=ignored)
        actual = cfg.model_dump(exclude=ignored)
        if expected != actual:
            logger.error(f"Checkpoint {path.name} incompatível: {actual} vs {expected}")
            raise IncompatibleCheckpointError(
                f"checkpoint {path.name} was trained with {actual}, expected {expected}",
                path=str(path)
            )

    payload = torch.load(path, map_location=map_location, weights_only=False)
    model = build(cfg)
    try:
        model.load_state_dict(payload["model_state"], strict=True)
    except RuntimeError as e:
        raise IncompatibleCheckpointError(f"checkpoint {path.name} does not match its config: {e}",
                                          path=str(path)) from e

    model.eval()
    logger.info(f"Checkpoint carregado: {path.name} (passo {sidecar.get('step')}, loss {sidecar.get('loss_id')})")
    return model, payload, sidecar
