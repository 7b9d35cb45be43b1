"""Hierarquia de erros estruturados do toolkit"""

from typing import Any, Optional


class ContrailsError(Exception):
    """Erro base; `exit_code` é o código de saída usado pela CLI"""

    exit_code: int = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        """Converte o erro para dicionário"""
        return {"error": type(self).__name__, "message": self.message, **self.details}


class ConfigError(ContrailsError):
    """Configuração inválida (loss, encoder, invariantes)"""

    exit_code = 2


class DataError(ContrailsError):
    """Problemas com arquivos de entrada ou dados"""

    exit_code = 3


class SceneFileNotFoundError(DataError):
    """Arquivo de cena inexistente"""


class BandNotFoundError(DataError):
    """Banda solicitada ausente na cena"""

    def __init__(self, band: int, path: str):
        super().__init__(f"band {band} not found", band=band, path=path)
        self.band = band


class ShapeMismatchError(DataError):
    """Formatos de arrays incompatíveis"""

    def __init__(self, what: str, expected: tuple, actual: tuple, band: Optional[int] = None):
        label = f"band {band} " if band is not None else ""
        super().__init__(
            f"shape mismatch in {what}: {label}expected {tuple(expected)}, got {tuple(actual)}",
            what=what, expected=tuple(expected), actual=tuple(actual), band=band
        )


class WavelengthOrderError(DataError):
    """Ordem de comprimentos de onda violada no BTD"""


class InvalidRasterError(DataError):
    """Raster sem pixels válidos ou com cabeçalho corrompido"""


class MaskDecodeError(DataError):
    """Máscara ilegível"""


class ManifestError(DataError):
    """Manifesto de dados inválido"""


class EmptyDatasetError(DataError):
    """Lista de cenas vazia"""


class MetricsLogError(DataError):
    """Log de métricas vazio ou malformado"""


class IncompatibleCheckpointError(DataError):
    """Checkpoint incompatível com a configuração do modelo"""


class EncoderWeightsMismatchError(DataError):
    """Pesos pré-treinados não correspondem à arquitetura do encoder"""

    def __init__(self, parameter: str, expected: tuple, actual: tuple):
        super().__init__(
            f"encoder weights mismatch at '{parameter}': expected {tuple(expected)}, got {tuple(actual)}",
            parameter=parameter, expected=tuple(expected), actual=tuple(actual)
        )
        self.parameter = parameter


class DivergenceError(ContrailsError):
    """Loss não finita durante o treino"""

    exit_code = 4

    def __init__(self, step: int, loss: float, last_good_checkpoint: Optional[str]):
        super().__init__(
            f"loss became non-finite ({loss}) at step {step}; last good checkpoint: {last_good_checkpoint}",
            step=step, loss=loss, last_good_checkpoint=last_good_checkpoint
        )
        self.last_good_checkpoint = last_good_checkpoint
