"""Deterministic on-the-fly example generation and synthetic test signals.

Each example is a pure function of ``(global_seed, epoch, index)``: the
derived seed drives the speech/noise pairing and the augmentation draw, so
pairings are re-randomized every epoch and results do not depend on worker
count or scheduling.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.signal import get_window

from augnorm.core.audio_io import read_wav, write_wav
from augnorm.core.augment import (
    ExampleProvenance,
    MixedExample,
    sample_augment_spec,
    synthesize_example,
)
from augnorm.core.config import AugmentConfig, BatchPlan, VadConfig
from augnorm.core.dsp import Waveform
from augnorm.core.errors import AugnormError, EmptyCorpusError, ExampleSynthesisError
from augnorm.core.manifest import Manifest, ManifestEntry, ingest
from augnorm.core.sidecar import SidecarRecord, write_example

logger = logging.getLogger(__name__)

SignalKind = Literal["speech-like", "white", "pink", "tone"]

_INT63_MASK = (1 << 63) - 1


def derive_seed(global_seed: int, epoch: int, index: int) -> int:
    """Per-example seed: SHA-256 of the triple, truncated to 63 bits."""
    content = json.dumps(
        {"global_seed": global_seed, "epoch": epoch, "index": index},
        sort_keys=True,
        separators=(",", ":"),
    )
    digest = hashlib.sha256(content.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & _INT63_MASK


class SourceCache:
    """Thread-safe decode-once cache of manifest audio."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._cache: dict[str, Waveform] = {}

    def get(self, entry: ManifestEntry) -> Waveform:
        with self._lock:
            cached = self._cache.get(entry.path)
        if cached is not None:
            return cached
        w = read_wav(entry.path, entry.sample_rate_hz)
        with self._lock:
            self._cache.setdefault(entry.path, w)
            return self._cache[entry.path]


class BatchGenerator:
    """Produces batches of augmented examples for any epoch.

    Instances are callable as ``generator(epoch)`` so they can feed
    :func:`augnorm.core.toy_model.train_toy_model` directly.
    """

    def __init__(
        self,
        speech: Manifest,
        noise: Manifest,
        plan: BatchPlan | None = None,
        augment: AugmentConfig | None = None,
        vad: VadConfig | None = None,
        jobs: int = 1,
        cache: SourceCache | None = None,
    ) -> None:
        """Initialize the generator.

        Args:
            speech: Speech sources.
            noise: Noise sources.
            plan: Seed, batch size and epoch length.
            augment: Augmentation distributions.
            vad: VAD used for level measurement.
            jobs: Worker threads per batch.
            cache: Shared decoded-audio cache.

        Raises:
            EmptyCorpusError: If either manifest is empty.
        """
        if len(speech) == 0:
            raise EmptyCorpusError("Speech manifest is empty")
        if len(noise) == 0:
            raise EmptyCorpusError("Noise manifest is empty")
        if jobs < 1:
            raise ValueError(f"jobs must be >= 1: {jobs}")
        self.speech = speech
        self.noise = noise
        self.plan = plan or BatchPlan()
        self.augment = augment or AugmentConfig()
        self.vad = vad or VadConfig()
        self.jobs = jobs
        self.cache = cache or SourceCache()
        self.generated = 0
        self.skipped = 0
        self._count_lock = threading.Lock()

    def example(self, epoch: int, index: int) -> MixedExample:
        """Synthesize example ``index`` of ``epoch``.

        Raises:
            ExampleSynthesisError: If the augmentation pipeline fails.
        """
        rng = np.random.default_rng(derive_seed(self.plan.global_seed, epoch, index))
        speech_entry = self.speech[int(rng.integers(len(self.speech)))]
        noise_entry = self.noise[int(rng.integers(len(self.noise)))]
        spec = sample_augment_spec(rng, self.augment)
        provenance = ExampleProvenance(
            epoch=epoch,
            index=index,
            speech_id=speech_entry.utterance_id,
            noise_id=noise_entry.utterance_id,
            speech_path=speech_entry.path,
            noise_path=noise_entry.path,
        )
        try:
            return synthesize_example(
                self.cache.get(speech_entry),
                self.cache.get(noise_entry),
                spec,
                self.vad,
                provenance,
            )
        except AugnormError as e:
            raise ExampleSynthesisError(index, e) from e

    def _try_example(self, epoch: int, index: int) -> MixedExample | None:
        try:
            example = self.example(epoch, index)
        except ExampleSynthesisError as e:
            logger.warning(f"Skipping example {index} of epoch {epoch}: {e.original_error}")
            with self._count_lock:
                self.skipped += 1
            return None
        with self._count_lock:
            self.generated += 1
        return example

    def examples(self, epoch: int = 0, count: int | None = None) -> Iterator[MixedExample]:
        """Successful examples of an epoch in index order (skips dropped)."""
        for batch in self.batches(epoch, count):
            yield from batch

    def batches(self, epoch: int = 0, count: int | None = None) -> Iterator[list[MixedExample]]:
        """Batches of ``plan.batch_size`` indices; failed examples are skipped.

        Args:
            epoch: Epoch number (part of every example seed).
            count: Number of example indices; defaults to ``plan.examples_per_epoch``.
        """
        total = self.plan.examples_per_epoch if count is None else count
        size = self.plan.batch_size
        executor = ThreadPoolExecutor(max_workers=self.jobs) if self.jobs > 1 else None
        try:
            for start in range(0, total, size):
                indices = range(start, min(start + size, total))
                if executor is None:
                    results = [self._try_example(epoch, i) for i in indices]
                else:
                    results = list(executor.map(lambda i: self._try_example(epoch, i), indices))
                batch = [r for r in results if r is not None]
                if batch:
                    yield batch
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

    def __call__(self, epoch: int) -> Iterator[list[MixedExample]]:
        return self.batches(epoch)


def generate_batches(
    m_speech: Manifest,
    m_noise: Manifest,
    plan: BatchPlan | None = None,
    epoch: int = 0,
    augment: AugmentConfig | None = None,
    vad: VadConfig | None = None,
    jobs: int = 1,
) -> Iterator[list[MixedExample]]:
    """Stream the batches of one epoch.

    Raises:
        EmptyCorpusError: If either manifest is empty.
    """
    return BatchGenerator(m_speech, m_noise, plan, augment, vad, jobs).batches(epoch)


def _speech_like(n: int, sample_rate_hz: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Harmonic bursts with Hann envelopes separated by silent pauses."""
    out = np.zeros(n, dtype=np.float64)
    edge = int(0.1 * sample_rate_hz)
    pos = edge
    end = n - edge
    min_burst = int(0.04 * sample_rate_hz)
    while end - pos >= min_burst:
        burst = min(int(rng.uniform(0.12, 0.3) * sample_rate_hz), end - pos)
        f0 = rng.uniform(100.0, 220.0)
        glide = rng.uniform(-0.15, 0.15)
        t = np.arange(burst) / sample_rate_hz
        phase = 2.0 * np.pi * f0 * (t + 0.5 * glide * t**2)
        tone = np.zeros(burst)
        n_harmonics = int(min(12, (sample_rate_hz / 2.0) // (f0 * 1.2)))
        for h in range(1, n_harmonics + 1):
            tone += np.sin(h * phase + rng.uniform(0.0, 2.0 * np.pi)) / h
        envelope = get_window("hann", burst, fftbins=False) * rng.uniform(0.3, 1.0)
        out[pos : pos + burst] = envelope * tone
        pos += burst + int(rng.uniform(0.1, 0.25) * sample_rate_hz)
    peak = float(np.max(np.abs(out)))
    return out * (0.5 / peak) if peak > 0 else out


def _pink(n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    spectrum = np.fft.rfft(rng.normal(0.0, 1.0, n))
    freqs = np.arange(spectrum.size, dtype=np.float64)
    freqs[0] = 1.0
    spectrum /= np.sqrt(freqs)
    spectrum[0] = 0.0
    pink = np.fft.irfft(spectrum, n=n)
    return pink * (0.1 / float(np.std(pink)))


def synth_test_signals(
    kind: SignalKind,
    duration_s: float,
    seed: int = 0,
    sample_rate_hz: int = 16000,
    tone_hz: float = 1000.0,
) -> Waveform:
    """Deterministic synthetic signal for tests and desk-scale corpora.

    Args:
        kind: ``speech-like`` (harmonic bursts with pauses and 0.1 s of
            silence at both ends), ``white`` (std 0.1), ``pink`` (1/f, std
            0.1) or ``tone`` (amplitude 0.5).
        duration_s: Length in seconds, at least 0.5.
        seed: Generator seed.
        sample_rate_hz: Sample rate.
        tone_hz: Frequency of the ``tone`` kind.

    Returns:
        The generated waveform.

    Raises:
        ValueError: If the duration is below 0.5 s or the kind is unknown.
    """
    if duration_s < 0.5:
        raise ValueError(f"duration_s must be at least 0.5 s: {duration_s}")
    n = int(round(duration_s * sample_rate_hz))
    rng = np.random.default_rng(seed)
    if kind == "speech-like":
        samples = _speech_like(n, sample_rate_hz, rng)
    elif kind == "white":
        samples = rng.normal(0.0, 0.1, n)
    elif kind == "pink":
        samples = _pink(n, rng)
    elif kind == "tone":
        samples = 0.5 * np.sin(2.0 * np.pi * tone_hz * np.arange(n) / sample_rate_hz)
    else:
        raise ValueError(f"Unknown signal kind: {kind}")
    return Waveform(samples, sample_rate_hz)


@dataclass(frozen=True, slots=True)
class SyntheticCorpus:
    """Manifests of a generated corpus."""

    speech: Manifest
    noise: Manifest


def write_synthetic_corpus(
    out_dir: Path | str,
    n_speech: int = 8,
    n_noise: int = 4,
    duration_s: float = 1.0,
    seed: int = 0,
    sample_rate_hz: int = 16000,
) -> SyntheticCorpus:
    """Write speech-like and noise WAVs plus their manifests.

    Noise files are 0.5 s longer than speech so every example has a crop
    offset to draw. Noise alternates between white and pink.

    Returns:
        Speech and noise manifests (also saved as ``speech.jsonl`` and
        ``noise.jsonl`` in ``out_dir``).
    """
    out_dir = Path(out_dir)
    speech_dir = out_dir / "speech"
    noise_dir = out_dir / "noise"
    for i in range(n_speech):
        w = synth_test_signals("speech-like", duration_s, seed * 1000 + i, sample_rate_hz)
        write_wav(speech_dir / f"speech_{i:04d}.wav", w)
    for i in range(n_noise):
        kind: SignalKind = "white" if i % 2 == 0 else "pink"
        w = synth_test_signals(kind, duration_s + 0.5, seed * 1000 + 500 + i, sample_rate_hz)
        write_wav(noise_dir / f"noise_{i:04d}.wav", w)

    speech = ingest([speech_dir], "speech", sample_rate_hz)
    noise = ingest([noise_dir], "noise", sample_rate_hz)
    speech.save(out_dir / "speech.jsonl")
    noise.save(out_dir / "noise.jsonl")
    return SyntheticCorpus(speech, noise)


@dataclass(frozen=True, slots=True)
class SynthesisSummary:
    """Outcome of writing one epoch of examples to disk."""

    out_dir: Path
    written: tuple[SidecarRecord, ...]
    skipped: int


def synthesize_corpus(
    generator: BatchGenerator,
    out_dir: Path | str,
    epoch: int = 0,
    count: int | None = None,
) -> SynthesisSummary:
    """Write mixture/target WAV pairs and sidecars for one epoch.

    Output names depend only on ``(epoch, index)``, so runs with the same
    seed and config write byte-identical files regardless of ``jobs``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    skipped_before = generator.skipped
    written = [
        write_example(out_dir, example, generator.vad)
        for example in generator.examples(epoch, count)
    ]
    skipped = generator.skipped - skipped_before
    if skipped:
        logger.warning(f"Skipped {skipped} example(s) while synthesizing into {out_dir}")
    return SynthesisSummary(out_dir, tuple(written), skipped)
