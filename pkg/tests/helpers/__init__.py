"""Shared test helpers: deterministic signal builders."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from augnorm.core.audio_io import write_wav
from augnorm.core.corpus import synth_test_signals
from augnorm.core.dsp import Waveform

SR = 16000


def white(seconds: float, seed: int = 0, std: float = 0.1, sr: int = SR) -> Waveform:
    rng = np.random.default_rng(seed)
    return Waveform(rng.normal(0.0, std, int(round(seconds * sr))), sr)


def sine(freq_hz: float, seconds: float, amplitude: float = 1.0, sr: int = SR) -> Waveform:
    t = np.arange(int(round(seconds * sr))) / sr
    return Waveform(amplitude * np.sin(2.0 * np.pi * freq_hz * t), sr)


def speech(seconds: float = 1.0, seed: int = 0) -> Waveform:
    return synth_test_signals("speech-like", seconds, seed)


def random_spectrum(
    shape: tuple[int, int], rng: np.random.Generator, low: float = 0.0, high: float = 1.0
) -> NDArray[np.complex128]:
    """Complex matrix with magnitudes in [low, high] and uniform phases."""
    mag = rng.uniform(low, high, shape)
    phase = rng.uniform(-np.pi, np.pi, shape)
    return mag * np.exp(1j * phase)


def write_corpus(root: Path, n_speech: int = 3, n_noise: int = 2, seconds: float = 1.0) -> Path:
    """Write a tiny speech/noise tree under ``root`` and return it."""
    for i in range(n_speech):
        write_wav(root / "speech" / f"utt_{i}.wav", speech(seconds, seed=i))
    for i in range(n_noise):
        write_wav(root / "noise" / f"noise_{i}.wav", white(seconds + 0.5, seed=100 + i))
    return root
