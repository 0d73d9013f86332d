"""Mono WAV reading and writing through soundfile."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import soundfile as sf

from augnorm.core.dsp import Waveform
from augnorm.core.errors import AudioFormatError

logger = logging.getLogger(__name__)

WavSubtype = Literal["FLOAT", "PCM_16"]

_DECODE_ERRORS: tuple[type[Exception], ...] = (sf.SoundFileError, RuntimeError, OSError)


@dataclass(frozen=True, slots=True)
class WavInfo:
    """Header facts of a WAV file."""

    path: Path
    sample_rate_hz: int
    channels: int
    frames: int
    subtype: str

    @property
    def duration_s(self) -> float:
        return self.frames / self.sample_rate_hz


def wav_info(path: Path | str) -> WavInfo:
    """Read the header of a sound file.

    Raises:
        AudioFormatError: If the file cannot be opened or parsed.
    """
    path = Path(path)
    try:
        info = sf.info(str(path))
    except _DECODE_ERRORS as e:
        raise AudioFormatError(f"Cannot decode {path}: {e}") from e
    return WavInfo(
        path=path,
        sample_rate_hz=int(info.samplerate),
        channels=int(info.channels),
        frames=int(info.frames),
        subtype=str(info.subtype),
    )


def read_wav(path: Path | str, sample_rate_hz: int | None = 16000) -> Waveform:
    """Load a mono WAV (float or 16-bit PCM) as float64 in [-1, 1] full scale.

    Args:
        path: File to read.
        sample_rate_hz: Required rate; None accepts any rate.

    Returns:
        Decoded waveform.

    Raises:
        AudioFormatError: If decoding fails, the file is not mono, or the
            rate differs from ``sample_rate_hz``.
    """
    path = Path(path)
    try:
        data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    except _DECODE_ERRORS as e:
        raise AudioFormatError(f"Cannot decode {path}: {e}") from e

    if data.shape[1] != 1:
        raise AudioFormatError(f"{path} has {data.shape[1]} channels; only mono is supported")
    if sample_rate_hz is not None and rate != sample_rate_hz:
        raise AudioFormatError(
            f"{path} is sampled at {rate} Hz; expected {sample_rate_hz} Hz (no resampling)"
        )
    samples = data[:, 0]
    if not np.all(np.isfinite(samples)):
        raise AudioFormatError(f"{path} contains non-finite samples")
    return Waveform(samples, int(rate))


def write_wav(path: Path | str, w: Waveform, subtype: WavSubtype = "FLOAT") -> Path:
    """Write a mono WAV file.

    32-bit float keeps values beyond full scale; ``PCM_16`` clips them.

    Raises:
        AudioFormatError: If the file cannot be written.
    """
    path = Path(path)
    samples = w.samples
    if subtype == "PCM_16":
        peak = float(np.max(np.abs(samples))) if len(w) else 0.0
        if peak > 1.0:
            logger.warning(f"Clipping {path.name} to 16-bit full scale (peak {peak:.3f})")
            samples = np.clip(samples, -1.0, 1.0)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        sf.write(str(path), samples, w.sample_rate_hz, subtype=subtype, format="WAV")
    except _DECODE_ERRORS as e:
        raise AudioFormatError(f"Cannot write {path}: {e}") from e
    return path
