"""Configurações do toolkit de segmentação de contrails"""

import sys
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LossId = Literal["dice", "logdice", "focal", "sr"]

# Orçamento de passos por loss (SR converge com metade dos passos)
DEFAULT_STEPS = {"dice": 8000, "logdice": 8000, "focal": 8000, "sr": 4000}


class IngestSettings(BaseSettings):
    """Configurações de pré-processamento BTD"""

    band_a: int = Field(default=13, description="Banda de menor comprimento de onda (subtraendo)")
    band_b: int = Field(default=15, description="Banda de maior comprimento de onda")
    lo_percentile: float = Field(default=2.0, ge=0.0, le=100.0, description="Percentil mapeado para 0")
    hi_percentile: float = Field(default=98.0, ge=0.0, le=100.0, description="Percentil mapeado para 1")

    model_config = SettingsConfigDict(env_prefix="INGEST_", extra="forbid")

    @model_validator(mode="after")
    def _check_percentiles(self):
        if not self.lo_percentile < self.hi_percentile:
            raise ValueError("lo_percentile deve ser menor que hi_percentile")
        return self


class AugmentationConfig(BaseSettings):
    """Configurações de augmentação de imagens"""

    out_size: int = Field(default=320, gt=0, description="Tamanho final (múltiplo de 32)")
    rotate_limit: float = Field(default=45.0, ge=0.0, description="Rotação máxima em graus")
    scale_range: Tuple[float, float] = Field(default=(0.5, 1.5), description="Escala (min, max)")
    shift_fraction: float = Field(default=0.2, ge=0.0, lt=1.0, description="Deslocamento máximo")
    perspective_strength: Tuple[float, float] = Field(default=(0.05, 0.1), description="Distorção de perspectiva")
    brightness_limit: float = Field(default=0.2, ge=0.0, description="Variação de brilho")
    contrast_limit: float = Field(default=0.2, ge=0.0, lt=1.0, description="Variação de contraste")
    gamma_range: Tuple[float, float] = Field(default=(0.7, 1.4), description="Correção gama (min, max)")

    rotate_p: float = Field(default=0.8, ge=0.0, le=1.0)
    scale_p: float = Field(default=0.8, ge=0.0, le=1.0)
    shift_p: float = Field(default=0.8, ge=0.0, le=1.0)
    perspective_p: float = Field(default=0.5, ge=0.0, le=1.0)
    brightness_p: float = Field(default=0.5, ge=0.0, le=1.0)
    contrast_p: float = Field(default=0.5, ge=0.0, le=1.0)
    gamma_p: float = Field(default=0.5, ge=0.0, le=1.0)

    model_config = SettingsConfigDict(env_prefix="AUG_", extra="forbid")

    @field_validator("out_size")
    @classmethod
    def _multiple_of_32(cls, value: int) -> int:
        if value % 32 != 0:
            raise ValueError(f"out_size deve ser múltiplo de 32 (recebido {value})")
        return value

    @model_validator(mode="after")
    def _check_ranges(self):
        checks = {
            "scale_range": (self.scale_range, self.scale_p),
            "perspective_strength": (self.perspective_strength, self.perspective_p),
            "gamma_range": (self.gamma_range, self.gamma_p),
        }
        for name, ((low, high), prob) in checks.items():
            if low > high:
                raise ValueError(f"{name} invertido: {low} > {high}")
            if low == high and prob > 0 and name != "perspective_strength":
                raise ValueError(f"{name} degenerado com probabilidade {prob} > 0")
        if self.scale_range[0] <= 0 or self.gamma_range[0] <= 0:
            raise ValueError("scale_range e gamma_range devem ser positivos")
        if self.perspective_strength[0] < 0:
            raise ValueError("perspective_strength deve ser não negativo")
        return self


class ModelConfig(BaseSettings):
    """Configurações da ResUNet"""

    encoder_depth: int = Field(default=5, ge=1, le=5, description="Número de estágios de downsampling")
    encoder_variant: str = Field(default="resnet34", description="Arquitetura residual do encoder")
    decoder_channels: List[int] = Field(
        default_factory=lambda: [256, 128, 64, 32, 16],
        description="Canais por estágio de upsampling"
    )
    in_channels: int = Field(default=3, description="Canais de entrada do encoder")
    out_channels: int = Field(default=1, description="Canais de saída (logits)")
    use_pretrained: bool = Field(default=True, description="Carrega encoder pré-treinado")
    weights_source: str = Field(default="imagenet", description="'imagenet' ou caminho de state_dict")

    model_config = SettingsConfigDict(env_prefix="MODEL_", extra="forbid")

    @model_validator(mode="after")
    def _check_decoder(self):
        if len(self.decoder_channels) != self.encoder_depth:
            raise ValueError(
                f"decoder_channels tem {len(self.decoder_channels)} estágios, "
                f"esperado encoder_depth={self.encoder_depth}"
            )
        if self.in_channels != 3 or self.out_channels != 1:
            raise ValueError("a ResUNet usa in_channels=3 e out_channels=1")
        return self


class HoughSettings(BaseSettings):
    """Configurações do espaço de Hough"""

    n_theta: int = Field(default=180, ge=2, description="Número de bins de θ")
    rho_resolution: float = Field(default=1.0, gt=0.0, description="Largura do bin de ρ em pixels")
    tau: float = Field(default=0.25, ge=0.0, le=1.0, description="Limiar do squash")
    beta: float = Field(default=20.0, gt=0.0, description="Nitidez do squash")
    threshold: float = Field(default=0.5, ge=0.0, le=1.0, description="Limiar de extração de linhas")
    nms_radius: int = Field(default=2, ge=0, description="Raio de supressão (bins)")
    min_line_length: float = Field(default=8.0, ge=0.0, description="Comprimento mínimo da linha no quadro")
    eps: float = Field(default=1e-6, gt=0.0, description="Guarda do denominador")

    model_config = SettingsConfigDict(env_prefix="HOUGH_", extra="forbid")


class FocalConfig(BaseSettings):
    """Configurações da Focal loss"""

    gamma: float = Field(default=2.0, gt=0.0, description="Fator de modulação γ")

    model_config = SettingsConfigDict(env_prefix="FOCAL_", extra="forbid")


class SRLossConfig(BaseSettings):
    """Configurações da SR Loss"""

    alpha: float = Field(default=0.5, ge=0.0, le=1.0, description="Peso do termo em espaço de pixels")
    hough: HoughSettings = Field(default_factory=HoughSettings)

    model_config = SettingsConfigDict(env_prefix="SR_", extra="forbid", env_nested_delimiter="__")


class RunConfig(BaseSettings):
    """Configurações de uma execução de treino"""

    loss_id: LossId = Field(default="dice", description="Loss: dice, logdice, focal ou sr")
    steps: Optional[int] = Field(default=None, gt=0, description="Passos de treino (None = padrão da loss)")
    batch_size: int = Field(default=8, gt=0)
    learning_rate: float = Field(default=1e-4, gt=0.0)
    seed: int = Field(default=42, ge=0)
    eval_every: int = Field(default=100, gt=0)
    checkpoint_every: int = Field(default=500, gt=0)
    eval_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    manifest_path: str = Field(default="data/manifest.tsv", description="Manifesto de cenas")
    output_dir: str = Field(default="runs/default", description="Diretório de saída")
    num_workers: int = Field(default=0, ge=0, description="Threads de augmentação")
    device: str = Field(default="cpu", description="Dispositivo torch")

    model_config = SettingsConfigDict(env_prefix="RUN_", extra="forbid")

    @model_validator(mode="after")
    def _check_steps(self):
        if self.eval_every > self.total_steps:
            raise ValueError(f"eval_every ({self.eval_every}) maior que steps ({self.total_steps})")
        return self

    @property
    def total_steps(self) -> int:
        """Passos efetivos, usando o orçamento padrão da loss quando omitido"""
        return self.steps if self.steps is not None else DEFAULT_STEPS[self.loss_id]


class LoggingSettings(BaseSettings):
    """Configurações de logging"""

    log_level: str = Field(default="INFO", description="Log level")
    log_file: str = Field(default="contrails.log", description="Log file path")

    model_config = SettingsConfigDict(env_prefix="", extra="ignore")


class Settings(BaseSettings):
    """Configurações gerais do sistema"""

    ingest: IngestSettings = Field(default_factory=IngestSettings)
    augmentation: AugmentationConfig = Field(default_factory=AugmentationConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    focal: FocalConfig = Field(default_factory=FocalConfig)
    sr: SRLossConfig = Field(default_factory=SRLossConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_nested_delimiter="__",
        extra="ignore"
    )


def get_settings() -> Settings:
    """Retorna a instância de configurações"""
    try:
        return Settings()
    except ValidationError as e:
        raise ConfigError(f"Configuração inválida: {e}") from e


def load_settings(config_path: Optional[str | Path] = None, **overrides) -> Settings:
    """
    Carrega as configurações de um arquivo TOML declarativo

    Args:
        config_path: Caminho do arquivo TOML (None = apenas ambiente/.env)
        **overrides: Valores por seção, ex. run={"seed": 7}

    Returns:
        Configurações validadas
    """
    data: dict = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"Arquivo de configuração não encontrado: {path}", path=str(path))
        try:
            with path.open("rb") as handle:
                data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"TOML inválido em {path}: {e}", path=str(path)) from e

    unknown = set(data) - set(Settings.model_fields)
    if unknown:
        raise ConfigError(f"Seções desconhecidas na configuração: {sorted(unknown)}", sections=sorted(unknown))

    for section, values in overrides.items():
        if values:
            data.setdefault(section, {}).update(values)

    try:
        return Settings(**data)
    except ValidationError as e:
        raise ConfigError(f"Configuração inválida: {e}") from e
