"""Configuration management with validation.

Supports TOML and YAML configuration files with Pydantic validation. The
models double as the parameter objects of the DSP, augmentation, loss and
metric functions, so a loaded config can be passed straight into them.
"""

from __future__ import annotations

import math
import tomllib
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

import numpy as np
import tomlkit
import yaml
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.signal import get_window
from tomlkit.exceptions import TOMLKitError
from tomlkit.toml_document import TOMLDocument

from augnorm.core.errors import ConfigError

AugmentPreset = Literal["none", "snr", "snr_spec", "snr_spec_level"]


@lru_cache(maxsize=8)
def _sqrt_hann(length: int) -> NDArray[np.float64]:
    """Periodic square-root Hann window (read-only, cached per length)."""
    window = np.sqrt(get_window("hann", length, fftbins=True)).astype(np.float64)
    window.setflags(write=False)
    return window


class FrameConfig(BaseModel):
    """STFT framing: 512-point FFT, 32 ms square-root Hann, 16 ms shift at 16 kHz."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sample_rate_hz: int = Field(default=16000, gt=0)
    fft_size: int = Field(default=512, gt=0)
    window_len: int = Field(default=512, gt=0)
    hop: int = Field(default=256, gt=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> FrameConfig:
        if self.window_len % self.hop != 0:
            raise ValueError(f"hop ({self.hop}) must divide window_len ({self.window_len})")
        if self.window_len > self.fft_size:
            raise ValueError(
                f"window_len ({self.window_len}) must not exceed fft_size ({self.fft_size})"
            )
        return self

    @classmethod
    def from_ms(
        cls, window_ms: float = 32.0, hop_ms: float = 16.0, sample_rate_hz: int = 16000
    ) -> FrameConfig:
        """Derive sample counts from millisecond figures.

        The FFT size is the window length rounded up to a power of two.
        """
        window_len = int(round(window_ms * sample_rate_hz / 1000.0))
        hop = int(round(hop_ms * sample_rate_hz / 1000.0))
        fft_size = 1 << max(window_len - 1, 1).bit_length()
        return cls(sample_rate_hz=sample_rate_hz, fft_size=fft_size, window_len=window_len, hop=hop)

    @property
    def n_bins(self) -> int:
        """Number of one-sided frequency bins (fft_size/2 + 1)."""
        return self.fft_size // 2 + 1

    @property
    def window_ms(self) -> float:
        return 1000.0 * self.window_len / self.sample_rate_hz

    @property
    def hop_ms(self) -> float:
        return 1000.0 * self.hop / self.sample_rate_hz

    @property
    def is_cola(self) -> bool:
        """Whether analysis x synthesis windows overlap-add to a constant."""
        return self.window_len // self.hop >= 2

    @property
    def overlap_gain(self) -> float:
        """Constant the squared window overlap-adds to (window_len / (2 hop)) when COLA."""
        return self.window_len / (2.0 * self.hop) if self.is_cola else 1.0

    def window(self) -> NDArray[np.float64]:
        """Analysis (and synthesis) window of length window_len."""
        return _sqrt_hann(self.window_len)


class VadConfig(BaseModel):
    """Level-threshold VAD: frames within threshold_db of the loudest frame are active."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    threshold_db: float = Field(default=-40.0, lt=0)
    frame: FrameConfig = Field(default_factory=FrameConfig)


class AugmentConfig(BaseModel):
    """Distributions of the on-the-fly augmentation parameters."""

    model_config = ConfigDict(extra="forbid")

    snr_mean_db: float = 5.0
    snr_std_db: float = Field(default=10.0, ge=0)
    level_mean_dbfs: float = -28.0
    level_std_db: float = Field(default=10.0, ge=0)
    # "variance" reads level_std_db as a variance in dB^2
    level_spread: Literal["std", "variance"] = "std"
    biquad_bound: float = Field(default=0.375, ge=0, lt=0.5)

    spectral: bool = True
    snr_mode: Literal["gaussian", "discrete"] = "gaussian"
    snr_choices_db: list[float] = Field(default_factory=lambda: [-6.0, -3.0, 0.0, 3.0, 6.0, 9.0])
    level: bool = True

    @field_validator("snr_choices_db")
    @classmethod
    def validate_snr_choices(cls, v: list[float]) -> list[float]:
        """Discrete SNR choices must be a nonempty list of finite values."""
        if not v:
            raise ValueError("snr_choices_db must not be empty")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("snr_choices_db must be finite")
        return v

    @property
    def level_sigma_db(self) -> float:
        """Standard deviation of the level draw in dB."""
        if self.level_spread == "variance":
            return math.sqrt(self.level_std_db)
        return self.level_std_db

    @classmethod
    def preset(cls, name: AugmentPreset, **overrides: Any) -> AugmentConfig:
        """Build one of the ablation conditions.

        Args:
            name: ``none`` (discrete SNRs only), ``snr`` (continuous SNR),
                ``snr_spec`` (plus spectral shaping) or ``snr_spec_level``
                (plus level augmentation).
            **overrides: Field overrides applied on top of the preset.

        Returns:
            The configured AugmentConfig.
        """
        stages: dict[str, dict[str, Any]] = {
            "none": {"snr_mode": "discrete", "spectral": False, "level": False},
            "snr": {"snr_mode": "gaussian", "spectral": False, "level": False},
            "snr_spec": {"snr_mode": "gaussian", "spectral": True, "level": False},
            "snr_spec_level": {"snr_mode": "gaussian", "spectral": True, "level": True},
        }
        if name not in stages:
            raise ConfigError(f"Unknown augmentation preset: {name}")
        return cls.model_validate({**stages[name], **overrides})

    def with_preset(self, name: AugmentPreset) -> AugmentConfig:
        """Apply a preset's stage toggles, keeping this config's distributions."""
        return AugmentConfig.preset(name, **self.model_dump(exclude={"spectral", "snr_mode", "level"}))


class LossConfig(BaseModel):
    """Compressed complex spectral loss parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    c: float = Field(default=0.3, gt=0, le=1)
    alpha: float = Field(default=0.3, ge=0, le=1)
    epsilon: float = Field(default=1e-12, gt=0)
    reduction: Literal["sum", "mean"] = "sum"


class MetricsConfig(BaseModel):
    """Objective metric conventions."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    si_sdr_cap_db: float = Field(default=100.0, gt=0)
    seg_snr_floor_db: float = -10.0
    seg_snr_ceiling_db: float = 35.0
    fw_bands: int = Field(default=25, gt=0)
    fw_gamma: float = Field(default=0.2, gt=0)
    cd_order: int = Field(default=10, gt=0)
    frame: FrameConfig = Field(default_factory=FrameConfig)

    @model_validator(mode="after")
    def _check_clamp(self) -> MetricsConfig:
        if self.seg_snr_floor_db >= self.seg_snr_ceiling_db:
            raise ValueError("seg_snr_floor_db must be below seg_snr_ceiling_db")
        return self


class BatchPlan(BaseModel):
    """Deterministic on-the-fly pairing of speech and noise."""

    model_config = ConfigDict(extra="forbid")

    global_seed: int = Field(default=0, ge=0)
    batch_size: int = Field(default=8, gt=0)
    examples_per_epoch: int = Field(default=64, gt=0)
    pairing: Literal["random"] = "random"


class TrainConfig(BaseModel):
    """Toy mask-estimator training."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=30, ge=0)
    learning_rate: float = Field(default=0.5, gt=0)
    batch_size: int = Field(default=8, gt=0)
    examples_per_epoch: int = Field(default=32, gt=0)
    validation_examples: int = Field(default=16, gt=0)
    init_scale: float = Field(default=0.01, ge=0)
    per_bin_mean: bool = True
    feature_epsilon: float = Field(default=1e-12, gt=0)
    example_duration_s: float = Field(default=1.0, ge=0.5)


class RuntimeConfig(BaseModel):
    """Process-level settings for CLI runs."""

    model_config = ConfigDict(extra="forbid")

    console_verbosity: Literal["debug", "info", "warning", "error"] = "info"
    out_dir: str = "./augnorm_out"
    jobs: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)


class Config(BaseModel):
    """Root configuration model."""

    frame: FrameConfig = Field(default_factory=FrameConfig)
    vad: VadConfig = Field(default_factory=VadConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    batch: BatchPlan = Field(default_factory=BatchPlan)
    train: TrainConfig = Field(default_factory=TrainConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _inherit_frame(self) -> Config:
        # VAD and metrics follow [frame] unless given their own framing
        if "frame" not in self.vad.model_fields_set:
            self.vad = self.vad.model_copy(update={"frame": self.frame})
        if "frame" not in self.metrics.model_fields_set:
            self.metrics = self.metrics.model_copy(update={"frame": self.frame})
        return self


def load_config(path: Path | str) -> Config:
    """Load and validate configuration from file.

    Supports both TOML and YAML formats (detected by extension).

    Args:
        path: Path to configuration file.

    Returns:
        Validated Config object.

    Raises:
        ConfigError: If file cannot be read, parsed, or validated.
    """
    path = Path(path)

    if not path.exists():
        raise ConfigError(f"Configuration file not found: {path}")

    try:
        if path.suffix in (".toml",):
            with open(path, "rb") as f:
                data = tomllib.load(f)
        elif path.suffix in (".yaml", ".yml"):
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        else:
            raise ConfigError(f"Unsupported config file extension: {path.suffix}")
    except OSError as e:
        raise ConfigError(f"Failed to read configuration file {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Failed to parse TOML configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse YAML configuration {path}: {e}") from e

    try:
        return Config.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Configuration validation failed: {e}") from e


def load_config_or_default(path: Path | str | None = None) -> Config:
    """Load config from file, or return default if file doesn't exist.

    Args:
        path: Optional path to configuration file. If None, returns default.

    Returns:
        Validated Config object.

    Raises:
        ConfigError: If file exists but cannot be parsed or validated.
    """
    if path is None:
        return Config()

    path = Path(path)
    if not path.exists():
        return Config()

    return load_config(path)


def create_default_config(path: Path | str) -> None:
    """Create a default configuration file.

    Args:
        path: Path where to create the config file.

    Raises:
        ConfigError: If file already exists or cannot be written.
    """
    path = Path(path)

    if path.exists():
        raise ConfigError(f"Configuration file already exists: {path}")

    try:
        content = _serialize_config(Config(), path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
    except ConfigError:
        raise
    except OSError as e:
        raise ConfigError(f"Failed to write configuration file {path}: {e}") from e


def save_config(config: Config, path: Path | str) -> None:
    """Persist validated config to disk.

    TOML files are updated in place so existing comments survive.

    Args:
        config: Config object to serialize.
        path: Destination config path (.toml/.yaml/.yml).

    Raises:
        ConfigError: If serialization or write fails.
    """
    path = Path(path)

    try:
        if path.suffix == ".toml":
            _save_toml_config_roundtrip(config, path)
            return

        content = _serialize_config(config, path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
    except ConfigError:
        raise
    except (OSError, TypeError, ValueError) as e:
        raise ConfigError(f"Failed to save configuration file {path}: {e}") from e


def _serialize_config(config: Config, path: Path) -> str:
    """Serialize config to text based on file extension."""
    if path.suffix == ".toml":
        doc = tomlkit.document()
        _sync_mapping_table(doc, config.model_dump())
        return tomlkit.dumps(doc)
    if path.suffix in (".yaml", ".yml"):
        return yaml.dump(config.model_dump(), default_flow_style=False, sort_keys=False)
    raise ConfigError(f"Unsupported config file extension: {path.suffix}")


def _save_toml_config_roundtrip(config: Config, path: Path) -> None:
    """Save TOML config while preserving existing comments/format where possible."""
    doc: TOMLDocument
    try:
        with open(path, encoding="utf-8") as f:
            doc = tomlkit.parse(f.read())
    except FileNotFoundError:
        doc = tomlkit.document()
    except OSError as e:
        raise ConfigError(f"Failed to read existing TOML for save: {e}") from e
    except TOMLKitError as e:
        raise ConfigError(f"Failed to parse existing TOML for save: {e}") from e

    _sync_mapping_table(doc, config.model_dump())

    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(tomlkit.dumps(doc))
    except OSError as e:
        raise ConfigError(f"Failed writing TOML config {path}: {e}") from e


def _sync_mapping_table(table: Any, data: dict[str, Any]) -> None:
    """Sync nested key/value data into a TOML mapping table."""
    existing_keys = {key for key in table.keys() if isinstance(key, str)}
    for key in existing_keys - set(data.keys()):
        del table[key]

    for key, value in data.items():
        if isinstance(value, dict):
            sub = table.get(key)
            if sub is None or not isinstance(sub, dict):
                sub = tomlkit.table()
                table[key] = sub
            _sync_mapping_table(sub, value)
        else:
            table[key] = tomlkit.item(value)
