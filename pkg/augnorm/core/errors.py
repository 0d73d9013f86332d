"""Error taxonomy for augnorm.

Every error carries a stable ``code`` so the CLI can emit machine-readable
error records.
"""

from __future__ import annotations


class AugnormError(Exception):
    """Base exception for all augnorm errors."""

    code = "augnorm_error"


class ConfigError(AugnormError):
    """Raised when configuration is invalid or cannot be loaded."""

    code = "config_error"


class InsufficientLengthError(AugnormError):
    """Raised when a signal is shorter than one analysis window."""

    code = "insufficient_length"

    def __init__(self, length: int, window_len: int) -> None:
        """Initialize insufficient length error.

        Args:
            length: Number of samples in the offending signal.
            window_len: Minimum number of samples required.
        """
        self.length = length
        self.window_len = window_len
        super().__init__(f"Signal of {length} samples is shorter than one window ({window_len})")


class ShapeMismatchError(AugnormError):
    """Raised when two arrays that must agree in shape do not."""

    code = "shape_mismatch"


class UnstableFilterError(AugnormError):
    """Raised when biquad denominator poles are on or outside the unit circle."""

    code = "unstable_filter"


class NoActiveFramesError(AugnormError):
    """Raised when no frame passes the VAD threshold (e.g. digital silence)."""

    code = "no_active_frames"


class NoiseTooShortError(AugnormError):
    """Raised when a noise signal is shorter than the speech it must cover."""

    code = "noise_too_short"

    def __init__(self, noise_len: int, speech_len: int) -> None:
        self.noise_len = noise_len
        self.speech_len = speech_len
        super().__init__(f"Noise has {noise_len} samples but speech needs {speech_len}")


class NonPositiveSigmaError(AugnormError):
    """Raised when a loss normalization level is not strictly positive."""

    code = "non_positive_sigma"


class ZeroReferenceError(AugnormError):
    """Raised when a metric reference signal carries no energy."""

    code = "zero_reference"


class TrainingDivergedError(AugnormError):
    """Raised when the toy training loss stops being finite."""

    code = "training_diverged"

    def __init__(self, epoch: int, loss: float) -> None:
        """Initialize divergence error.

        Args:
            epoch: Epoch (1-based) in which the loss became non-finite.
            loss: The offending loss value.
        """
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training diverged in epoch {epoch} (loss={loss})")


class EmptyCorpusError(AugnormError):
    """Raised when ingestion or batch generation finds no usable audio."""

    code = "empty_corpus"


class AudioFormatError(AugnormError):
    """Raised when a WAV file cannot be decoded or has an unsupported layout."""

    code = "audio_format"


class SinkError(AugnormError):
    """Raised when a report sink fails to write output."""

    code = "sink_error"


class ExampleSynthesisError(AugnormError):
    """Raised when one corpus example cannot be synthesized."""

    code = "example_failed"

    def __init__(self, index: int, original_error: Exception) -> None:
        """Initialize example synthesis error.

        Args:
            index: Example index within its epoch.
            original_error: The error raised by the augmentation pipeline.
        """
        self.index = index
        self.original_error = original_error
        super().__init__(f"Example {index} could not be synthesized: {original_error}")
