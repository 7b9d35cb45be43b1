"""Log de métricas em JSON Lines: {"step", "split", "iou", "loss"} por linha"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, List

import pandas as pd
from loguru import logger

from ..exceptions import MetricsLogError

METRICS_COLUMNS = ["step", "split", "iou", "loss"]
SPLITS = ("train", "val")


@dataclass
class MetricRecord:
    """Uma avaliação de uma partição num passo"""
    step: int
    split: str
    iou: float
    loss: float


def append_records(path: str | Path, records: Iterable[MetricRecord]) -> None:
    """Acrescenta registros ao log (somente append)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(asdict(record)) + "\n")


def truncate_after(path: str | Path, step: int) -> None:
    """Remove registros posteriores a `step` (retomada a partir de um checkpoint)"""
    path = Path(path)
    if not path.exists():
        return
    frame = read_metrics(path, allow_empty=True)
    kept = frame[frame["step"] <= step]
    dropped = len(frame) - len(kept)
    path.write_text(
        "".join(json.dumps(row) + "\n" for row in kept.to_dict(orient="records")),
        encoding="utf-8"
    )
    if dropped:
        logger.warning(f"{dropped} registros após o passo {step} descartados de {path.name}")


def read_metrics(path: str | Path, allow_empty: bool = False) -> pd.DataFrame:
    """
    Lê e valida um log de métricas

    Args:
        path: Arquivo JSON Lines
        allow_empty: Aceita log sem registros

    Returns:
        DataFrame com colunas step, split, iou, loss
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"Log de métricas não encontrado: {path}")
        raise MetricsLogError(f"metrics log not found: {path}", path=str(path))

    text = path.read_text(encoding="utf-8")
    if not text.strip():
        if allow_empty:
            return pd.DataFrame(columns=METRICS_COLUMNS)
        raise MetricsLogError(f"metrics log is empty: {path}", path=str(path))

    rows: List[dict] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise MetricsLogError(f"malformed metrics log {path} at line {number}: {e}",
                                  path=str(path), line=number) from e
        if not isinstance(row, dict) or set(row) != set(METRICS_COLUMNS):
            raise MetricsLogError(f"malformed metrics record at {path}:{number}: {row}",
                                  path=str(path), line=number)
        if row["split"] not in SPLITS:
            raise MetricsLogError(f"unknown split '{row['split']}' at {path}:{number}",
                                  path=str(path), line=number)
        rows.append(row)

    frame = pd.DataFrame(rows, columns=METRICS_COLUMNS)
    return frame.astype({"step": int, "iou": float, "loss": float})
