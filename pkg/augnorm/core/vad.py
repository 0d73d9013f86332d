"""Level-threshold voice activity detection and active level measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from augnorm.core.config import VadConfig
from augnorm.core.dsp import Waveform, frame_rms
from augnorm.core.errors import NoActiveFramesError


@dataclass(frozen=True, eq=False, slots=True)
class ActiveLevel:
    """Result of an active level measurement.

    Attributes:
        sigma: Standard deviation of the samples covered by active frames.
        frame_mask: Boolean activity flag per frame.
        sample_mask: Boolean flag per sample (union of active frames).
    """

    sigma: float
    frame_mask: NDArray[np.bool_]
    sample_mask: NDArray[np.bool_]

    @property
    def dbfs(self) -> float:
        """Active level in dB relative to full scale."""
        return float(20.0 * np.log10(self.sigma))

    @property
    def active_fraction(self) -> float:
        return float(np.mean(self.frame_mask))


def active_frames(w: Waveform, vad: VadConfig) -> NDArray[np.bool_]:
    """Frames whose RMS exceeds the peak frame RMS plus ``threshold_db``.

    Raises:
        InsufficientLengthError: If the signal is shorter than one frame.
    """
    rms = frame_rms(w, vad.frame)
    peak = float(np.max(rms))
    if peak <= 0.0:
        return np.zeros(rms.shape, dtype=np.bool_)
    return np.asarray(rms > peak * 10.0 ** (vad.threshold_db / 20.0), dtype=np.bool_)


def active_level(w: Waveform, vad: VadConfig | None = None) -> ActiveLevel:
    """Standard deviation of the samples that belong to active frames.

    The statistic is taken over the union of active frame spans, not per
    frame. Because the threshold is relative to the peak frame, scaling a
    signal scales sigma by the same factor and leaves the masks unchanged.

    Args:
        w: Signal to measure.
        vad: VAD settings (defaults to -40 dB with 32 ms / 16 ms frames).

    Returns:
        The active level and activity masks.

    Raises:
        InsufficientLengthError: If the signal is shorter than one frame.
        NoActiveFramesError: If no frame passes the threshold.
    """
    vad = vad or VadConfig()
    mask = active_frames(w, vad)
    if not np.any(mask):
        raise NoActiveFramesError(f"No frame of {len(w)} samples passes the VAD threshold")

    cfg = vad.frame
    # Frames overlap; mark every sample an active frame covers.
    coverage = np.zeros(len(w) + cfg.window_len, dtype=np.int64)
    starts = np.flatnonzero(mask) * cfg.hop
    np.add.at(coverage, starts, 1)
    np.add.at(coverage, starts + cfg.window_len, -1)
    sample_mask = np.cumsum(coverage)[: len(w)] > 0

    sigma = float(np.std(w.samples[sample_mask]))
    if sigma <= 0.0:
        raise NoActiveFramesError("Active frames carry no variance")
    return ActiveLevel(sigma=sigma, frame_mask=mask, sample_mask=sample_mask)
