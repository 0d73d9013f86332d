"""Core augnorm modules."""

from augnorm.core.augment import AugmentSpec, MixedExample, synthesize_example
from augnorm.core.biquad import BiquadCoeffs, apply_biquad, sample_biquad
from augnorm.core.config import Config, load_config
from augnorm.core.corpus import BatchGenerator, derive_seed
from augnorm.core.dsp import Spectrogram, Waveform, istft, stft
from augnorm.core.errors import AugnormError, ConfigError
from augnorm.core.loss import compressed_loss, normalized_loss
from augnorm.core.metrics import MetricReport, evaluate_pair
from augnorm.core.toy_model import ToyMaskModel, train_toy_model
from augnorm.core.vad import active_level

__all__ = [
    # Signals
    "Waveform",
    "Spectrogram",
    "stft",
    "istft",
    # Augmentation
    "AugmentSpec",
    "MixedExample",
    "BiquadCoeffs",
    "apply_biquad",
    "sample_biquad",
    "active_level",
    "synthesize_example",
    "BatchGenerator",
    "derive_seed",
    # Loss and model
    "compressed_loss",
    "normalized_loss",
    "ToyMaskModel",
    "train_toy_model",
    # Metrics
    "MetricReport",
    "evaluate_pair",
    # Config and errors
    "Config",
    "load_config",
    "AugnormError",
    "ConfigError",
]
