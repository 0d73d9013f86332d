"""STFT analysis/synthesis and framing utilities.

Analysis and synthesis both use the periodic square-root Hann window, so
their product is a Hann window that overlap-adds to exactly one at 50%
overlap. Spectrograms are stored one-sided with ``fft_size/2 + 1`` rows
indexed ``[k, n]``.

Framing rule shared by stft, frame_rms, the VAD and the segmental metrics:
frame ``n`` starts at ``n * hop``; there are ``1 + ceil((len - window_len) /
hop)`` frames, the last one zero-padded when the hop grid does not end
exactly on the signal end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from augnorm.core.config import FrameConfig
from augnorm.core.errors import InsufficientLengthError, ShapeMismatchError

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]


def _frozen(values: ArrayLike, dtype: type) -> NDArray[np.generic]:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False, slots=True)
class Waveform:
    """Time-domain signal with full scale at amplitude 1.0.

    Attributes:
        samples: Read-only float64 sample vector.
        sample_rate_hz: Sample rate in Hz.
    """

    samples: FloatArray
    sample_rate_hz: int = 16000

    def __post_init__(self) -> None:
        """Copy samples into a read-only float64 vector and validate them."""
        samples = _frozen(self.samples, np.float64)
        if samples.ndim != 1:
            raise ValueError(f"Waveform samples must be one-dimensional, got shape {samples.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive: {self.sample_rate_hz}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Waveform samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def scaled(self, gain: float) -> Waveform:
        """Return a copy multiplied by a scalar gain."""
        return Waveform(self.samples * gain, self.sample_rate_hz)

    def segment(self, start: int, length: int) -> Waveform:
        """Return ``length`` samples starting at ``start``."""
        return Waveform(self.samples[start : start + length], self.sample_rate_hz)


@dataclass(frozen=True, eq=False, slots=True)
class Spectrogram:
    """One-sided complex STFT matrix.

    Attributes:
        bins: Read-only complex matrix of shape ``(fft_size/2 + 1, n_frames)``.
        config: Framing that produced (or will resynthesize) the matrix.
        length: Original signal length in samples; istft trims to it when set.
    """

    bins: ComplexArray
    config: FrameConfig = field(default_factory=FrameConfig)
    length: int | None = None

    def __post_init__(self) -> None:
        """Validate row count and finiteness."""
        bins = _frozen(self.bins, np.complex128)
        if bins.ndim != 2 or bins.shape[0] != self.config.n_bins:
            raise ShapeMismatchError(
                f"Spectrogram must have {self.config.n_bins} rows, got shape {bins.shape}"
            )
        if not np.all(np.isfinite(bins)):
            raise ValueError("Spectrogram entries must be finite")
        object.__setattr__(self, "bins", bins)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.bins.shape[0]), int(self.bins.shape[1]))

    @property
    def n_frames(self) -> int:
        return int(self.bins.shape[1])

    def with_bins(self, bins: ArrayLike) -> Spectrogram:
        """Return a spectrogram with the same framing and new values."""
        return Spectrogram(np.asarray(bins, dtype=np.complex128), self.config, self.length)

    def scaled(self, gain: float) -> Spectrogram:
        return self.with_bins(self.bins * gain)


def frame_count(length: int, cfg: FrameConfig) -> int:
    """Number of frames for a signal of ``length`` samples.

    Raises:
        InsufficientLengthError: If the signal is shorter than one window.
    """
    if length < cfg.window_len:
        raise InsufficientLengthError(length, cfg.window_len)
    return 1 + math.ceil((length - cfg.window_len) / cfg.hop)


def frame_signal(w: Waveform, cfg: FrameConfig) -> tuple[FloatArray, NDArray[np.int64]]:
    """Slice a waveform into (unwindowed) frames.

    Args:
        w: Input waveform.
        cfg: Framing configuration.

    Returns:
        Tuple of the frame matrix ``(n_frames, window_len)`` (tail frame
        zero-padded) and the number of real samples in each frame.

    Raises:
        InsufficientLengthError: If the signal is shorter than one window.
    """
    n_frames = frame_count(len(w), cfg)
    padded_len = (n_frames - 1) * cfg.hop + cfg.window_len
    padded = np.zeros(padded_len, dtype=np.float64)
    padded[: len(w)] = w.samples
    frames = sliding_window_view(padded, cfg.window_len)[:: cfg.hop][:n_frames]
    starts = np.arange(n_frames, dtype=np.int64) * cfg.hop
    valid = np.minimum(cfg.window_len, len(w) - starts)
    return np.array(frames), valid


def stft(w: Waveform, cfg: FrameConfig | None = None) -> Spectrogram:
    """One-sided STFT with square-root Hann analysis window.

    Frames start every ``hop`` samples and the last one may run past the end
    of the signal, so there are ``1 + ceil((len - window_len) / hop)`` frames
    and the tail is zero-padded. Every input sample lands in at least one
    frame.

    Args:
        w: Input waveform.
        cfg: Framing configuration (defaults to 512/512/256 at 16 kHz).

    Returns:
        Spectrogram of shape ``(fft_size/2 + 1, n_frames)``.

    Raises:
        InsufficientLengthError: If the signal is shorter than one window.
    """
    cfg = cfg or FrameConfig(sample_rate_hz=w.sample_rate_hz)
    frames, _ = frame_signal(w, cfg)
    spectra = np.fft.rfft(frames * cfg.window(), n=cfg.fft_size, axis=1)
    return Spectrogram(np.ascontiguousarray(spectra.T), cfg, len(w))


def istft(spec: Spectrogram, length: int | None = None) -> Waveform:
    """Weighted overlap-add resynthesis with square-root Hann synthesis window.

    The sum is divided by ``cfg.overlap_gain`` so any COLA hop reconstructs
    the interior exactly.

    Args:
        spec: One-sided spectrogram.
        length: Output length; defaults to ``spec.length``, else the full
            overlap-add span ``(n_frames - 1) * hop + window_len``.

    Returns:
        Reconstructed waveform (zero-padded or trimmed to ``length``).

    Raises:
        ShapeMismatchError: If the row count does not match the framing.
    """
    cfg = spec.config
    if spec.bins.ndim != 2 or spec.bins.shape[0] != cfg.n_bins:
        raise ShapeMismatchError(
            f"Expected {cfg.n_bins} rows for fft_size {cfg.fft_size}, got {spec.bins.shape}"
        )
    n_frames = spec.n_frames
    frames = np.fft.irfft(spec.bins.T, n=cfg.fft_size, axis=1)[:, : cfg.window_len]
    frames *= cfg.window()

    span = (n_frames - 1) * cfg.hop + cfg.window_len
    out = np.zeros(span, dtype=np.float64)
    for n in range(n_frames):
        start = n * cfg.hop
        out[start : start + cfg.window_len] += frames[n]
    out /= cfg.overlap_gain

    target = length if length is not None else spec.length
    if target is not None:
        if target <= span:
            out = out[:target]
        else:
            out = np.concatenate([out, np.zeros(target - span)])
    return Waveform(out, cfg.sample_rate_hz)


def frame_rms(w: Waveform, cfg: FrameConfig | None = None) -> FloatArray:
    """Per-frame RMS over the real (non-padded) samples of each frame.

    Raises:
        InsufficientLengthError: If the signal is shorter than one window.
    """
    cfg = cfg or FrameConfig(sample_rate_hz=w.sample_rate_hz)
    frames, valid = frame_signal(w, cfg)
    return np.sqrt(np.sum(frames**2, axis=1) / valid)


def interior_slice(n_frames: int, cfg: FrameConfig) -> slice:
    """Sample range fully covered by overlapping frames.

    Outside this range the overlap-added window sum is below one, so only the
    interior reconstructs exactly.
    """
    return slice(cfg.window_len - cfg.hop, n_frames * cfg.hop)
