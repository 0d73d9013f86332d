"""augnorm - level-aware augmentation and normalized loss for speech enhancement.

Generates augmented noisy/clean training pairs (SNR, spectral shaping and
level augmentation), provides the level-normalized compressed spectral loss
with analytic gradients, a toy mask estimator to exercise it, and the usual
speech enhancement metrics.
"""

__version__ = "0.1.0"

from augnorm.core import (
    AugmentSpec,
    BatchGenerator,
    Config,
    MixedExample,
    Spectrogram,
    ToyMaskModel,
    Waveform,
)

__all__ = [
    "__version__",
    "AugmentSpec",
    "BatchGenerator",
    "Config",
    "MixedExample",
    "Spectrogram",
    "ToyMaskModel",
    "Waveform",
]
