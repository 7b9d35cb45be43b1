"""Laço de treino com avaliação periódica, checkpoints e guarda de divergência"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
from loguru import logger
from tqdm import tqdm

from ..config import Settings
from ..data import eval_frame, make_step_stream
from ..exceptions import DivergenceError, EmptyDatasetError
from ..ingest import LabeledScene, load_split, read_manifest
from ..losses import get_loss, iou_metric
from ..losses.segmentation_losses import LossFn
from ..model import SegmentationModel, build, load_checkpoint, save_checkpoint
from .metrics_log import MetricRecord, append_records, truncate_after

METRICS_FILE = "metrics.jsonl"
CHECKPOINT_DIR = "checkpoints"
LAST_GOOD = "last_good"


@dataclass
class TrainState:
    """Estado do treino; a aleatoriedade dos dados é função pura de (semente, passo)"""
    model: SegmentationModel
    optimizer: torch.optim.Optimizer
    step: int
    seed: int
    loss_id: str
    history: List[dict] = field(default_factory=list)
    checkpoints: List[Path] = field(default_factory=list)


def checkpoint_name(step: int) -> str:
    return f"step_{step:06d}.pt"


def _to_tensor(batch: np.ndarray, device: str) -> torch.Tensor:
    """(B, H, W) -> (B, 1, H, W) float32"""
    return torch.from_numpy(np.ascontiguousarray(batch, dtype=np.float32)).unsqueeze(1).to(device)


def evaluate_frames(
    model: torch.nn.Module,
    frames: Sequence[Tuple[np.ndarray, np.ndarray]],
    loss_fn: Optional[LossFn],
    threshold: float,
    device: str = "cpu",
    batch_size: int = 8
) -> Tuple[float, float]:
    """
    IoU médio por cena e loss média sobre quadros sem augmentação

    Returns:
        (iou médio, loss média; nan quando loss_fn é None)
    """
    ious, losses = [], []
    was_training = model.training
    model.eval()
    with torch.no_grad():
        for start in range(0, len(frames), batch_size):
            chunk = frames[start:start + batch_size]
            images = _to_tensor(np.stack([image for image, _ in chunk]), device)
            masks = _to_tensor(np.stack([mask for _, mask in chunk]), device)
            logits = model(images)
            probs = torch.sigmoid(logits)
            for k in range(len(chunk)):
                ious.append(iou_metric(probs[k], masks[k], threshold))
                if loss_fn is not None:
                    losses.append(float(loss_fn(logits[k:k + 1], masks[k:k + 1])))
    model.train(was_training)
    return float(np.mean(ious)), float(np.mean(losses)) if losses else math.nan


class Trainer:
    """Executa uma configuração de treino sobre o manifesto"""

    def __init__(self, settings: Settings):
        """
        Inicializa o trainer

        Args:
            settings: Configurações completas (run, augmentation, model, losses)
        """
        self.settings = settings
        self.run = settings.run
        self.loss_fn = get_loss(self.run.loss_id, settings)
        self.output_dir = Path(self.run.output_dir)
        self.metrics_path = self.output_dir / METRICS_FILE
        self.checkpoint_dir = self.output_dir / CHECKPOINT_DIR

        logger.info(
            f"Trainer: loss {self.run.loss_id}, {self.run.total_steps} passos, lote {self.run.batch_size}, "
            f"lr {self.run.learning_rate}, semente {self.run.seed}, saída {self.output_dir}"
        )

    def _load_scenes(self) -> Tuple[List[LabeledScene], List[LabeledScene]]:
        entries = read_manifest(self.run.manifest_path)
        train_scenes = load_split(entries, "train")
        eval_scenes = load_split(entries, "eval")
        if not train_scenes or not eval_scenes:
            logger.error(f"Manifesto sem cenas suficientes: {len(train_scenes)} treino, {len(eval_scenes)} avaliação")
            raise EmptyDatasetError(
                f"manifest needs at least one train and one eval scene "
                f"(found {len(train_scenes)} train, {len(eval_scenes)} eval)",
                manifest=str(self.run.manifest_path)
            )
        return train_scenes, eval_scenes

    def _initial_state(self, resume_from: Optional[str | Path]) -> TrainState:
        torch.manual_seed(self.run.seed)

        if resume_from is None:
            model = build(self.settings.model).to(self.run.device)
            optimizer = torch.optim.Adam(model.parameters(), lr=self.run.learning_rate)
            if self.metrics_path.exists():
                logger.warning(f"Log de métricas anterior substituído: {self.metrics_path}")
                self.metrics_path.unlink()
            return TrainState(model, optimizer, 0, self.run.seed, self.run.loss_id)

        model, payload, sidecar = load_checkpoint(resume_from, expected_config=self.settings.model,
                                                  map_location=self.run.device)
        model.train()
        optimizer = torch.optim.Adam(model.parameters(), lr=self.run.learning_rate)
        if payload.get("optimizer_state") is not None:
            optimizer.load_state_dict(payload["optimizer_state"])
        step = int(payload["step"])
        if sidecar.get("seed") != self.run.seed:
            logger.warning(f"Semente do checkpoint ({sidecar.get('seed')}) difere da execução ({self.run.seed})")
        truncate_after(self.metrics_path, step)
        logger.info(f"Retomando do passo {step} ({resume_from})")
        return TrainState(model, optimizer, step, self.run.seed, self.run.loss_id,
                          history=list(payload.get("history", [])))

    def _save(self, state: TrainState, name: str) -> Path:
        path = save_checkpoint(
            self.checkpoint_dir / name, state.model, state.step, state.seed, state.loss_id,
            optimizer=state.optimizer, history=state.history,
            extra={"out_size": self.settings.augmentation.out_size}
        )
        state.checkpoints.append(path)
        return path

    def _evaluate(self, state: TrainState, train_frames, val_frames) -> None:
        records = []
        entry = {"step": state.step}
        for split, frames in (("train", train_frames), ("val", val_frames)):
            iou, loss = evaluate_frames(state.model, frames, self.loss_fn, self.run.eval_threshold,
                                        self.run.device, self.run.batch_size)
            records.append(MetricRecord(step=state.step, split=split, iou=iou, loss=loss))
            entry[f"{split}_iou"], entry[f"{split}_loss"] = iou, loss
        append_records(self.metrics_path, records)
        state.history.append(entry)
        logger.info(
            f"Passo {state.step}: IoU treino {entry['train_iou']:.4f}, validação {entry['val_iou']:.4f} "
            f"(loss {entry['val_loss']:.4f})"
        )

    def train(self, resume_from: Optional[str | Path] = None) -> TrainState:
        """
        Treina até run.total_steps

        Args:
            resume_from: Checkpoint .pt a partir do qual continuar

        Returns:
            Estado final do treino
        """
        torch.use_deterministic_algorithms(True, warn_only=True)
        train_scenes, eval_scenes = self._load_scenes()
        out_size = self.settings.augmentation.out_size
        train_frames = [eval_frame(scene, out_size) for scene in train_scenes]
        val_frames = [eval_frame(scene, out_size) for scene in eval_scenes]

        state = self._initial_state(resume_from)
        total = self.run.total_steps
        if state.step >= total:
            logger.info(f"Treino já concluído no passo {state.step}")
            return state

        stream = make_step_stream(train_scenes, self.settings.augmentation, self.run.seed,
                                  self.run.batch_size, start_step=state.step,
                                  num_workers=self.run.num_workers)
        state.model.train()

        progress = tqdm(total=total, initial=state.step, desc=f"Treino ({self.run.loss_id})")
        for batch in stream:
            images = _to_tensor(batch.images, self.run.device)
            masks = _to_tensor(batch.masks, self.run.device)

            logits = state.model(images)
            loss = self.loss_fn(logits, masks)
            if not torch.isfinite(loss):
                # Pesos atuais ainda são os do último passo válido
                last_good = self._save(state, LAST_GOOD)
                progress.close()
                logger.error(f"Loss não finita no passo {batch.step + 1}; checkpoint salvo em {last_good}")
                raise DivergenceError(batch.step + 1, loss.item(), str(last_good))

            state.optimizer.zero_grad(set_to_none=True)
            loss.backward()
            state.optimizer.step()
            state.step = batch.step + 1
            progress.update(1)
            progress.set_postfix(loss=f"{loss.item():.4f}")

            if state.step % self.run.eval_every == 0:
                self._evaluate(state, train_frames, val_frames)
            if state.step % self.run.checkpoint_every == 0 or state.step == total:
                self._save(state, checkpoint_name(state.step))
            if state.step >= total:
                break

        progress.close()
        logger.info(f"Treino concluído: {state.step} passos, {len(state.history)} avaliações")
        return state


def train(settings: Settings, resume_from: Optional[str | Path] = None) -> TrainState:
    """Treina um modelo conforme as configurações"""
    return Trainer(settings).train(resume_from)
