"""On-the-fly training example synthesis.

Pipeline per example (fixed order, since filtering changes levels):

1. crop the noise to the speech length at a seeded offset
2. shape speech and noise with independent random biquads
3. measure active levels of both with the threshold VAD
4. scale the noise to the target SNR and add it to the speech
5. scale mixture and clean target by one common gain so the target's
   active level hits the sampled dBFS value
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from augnorm.core.biquad import BiquadCoeffs, apply_biquad, sample_biquad
from augnorm.core.config import AugmentConfig, VadConfig
from augnorm.core.dsp import Waveform
from augnorm.core.errors import NoiseTooShortError
from augnorm.core.vad import active_level

logger = logging.getLogger(__name__)

_SEED_LIMIT = 2**63 - 1


@dataclass(frozen=True, slots=True)
class AugmentSpec:
    """Every random decision for one augmented example.

    Attributes:
        speech_filter: Spectral shaping applied to the speech.
        noise_filter: Spectral shaping applied to the noise.
        snr_db: Target active SNR.
        level_dbfs: Target active level of the scaled clean target.
        seed: Seed of the example's own random stream.
        noise_offset: Noise crop offset in samples; resolved from ``seed``
            when None.
    """

    speech_filter: BiquadCoeffs
    noise_filter: BiquadCoeffs
    snr_db: float
    level_dbfs: float
    seed: int = 0
    noise_offset: int | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite: {self.snr_db}")
        if not math.isfinite(self.level_dbfs):
            raise ValueError(f"level_dbfs must be finite: {self.level_dbfs}")
        if not 0 <= self.seed <= _SEED_LIMIT:
            raise ValueError(f"seed must fit in 63 bits: {self.seed}")
        if self.noise_offset is not None and self.noise_offset < 0:
            raise ValueError(f"noise_offset must be non-negative: {self.noise_offset}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "speech_filter": self.speech_filter.to_dict(),
            "noise_filter": self.noise_filter.to_dict(),
            "snr_db": self.snr_db,
            "level_dbfs": self.level_dbfs,
            "seed": self.seed,
            "noise_offset": self.noise_offset,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AugmentSpec:
        offset = data.get("noise_offset")
        return cls(
            speech_filter=BiquadCoeffs.from_dict(data["speech_filter"]),
            noise_filter=BiquadCoeffs.from_dict(data["noise_filter"]),
            snr_db=float(data["snr_db"]),
            level_dbfs=float(data["level_dbfs"]),
            seed=int(data.get("seed", 0)),
            noise_offset=None if offset is None else int(offset),
        )


@dataclass(frozen=True, slots=True)
class ExampleProvenance:
    """Where a corpus example came from."""

    epoch: int
    index: int
    speech_id: str
    noise_id: str
    speech_path: str
    noise_path: str


@dataclass(frozen=True, eq=False, slots=True)
class MixedExample:
    """One augmented training pair.

    Attributes:
        mixture: Noisy input x.
        target: Scaled clean speech s.
        noise: Scaled, filtered noise component (mixture - target).
        spec: Augmentation parameters with the noise offset resolved.
        sigma_s: Active level of ``target`` (linear standard deviation).
        clipped_samples: Mixture samples beyond full scale (kept unclipped).
        provenance: Source files, when produced by the batch generator.
    """

    mixture: Waveform
    target: Waveform
    noise: Waveform
    spec: AugmentSpec
    sigma_s: float
    clipped_samples: int = 0
    provenance: ExampleProvenance | None = None

    def __post_init__(self) -> None:
        if len(self.mixture) != len(self.target):
            raise ValueError("mixture and target must have equal length")
        if not self.sigma_s > 0:
            raise ValueError(f"sigma_s must be positive: {self.sigma_s}")


@dataclass(frozen=True, eq=False, slots=True)
class MixResult:
    """Output of SNR mixing."""

    mixture: Waveform
    noise_gain: float
    scaled_noise: Waveform
    speech_sigma: float
    noise_sigma: float


@dataclass(frozen=True, eq=False, slots=True)
class LevelScaleResult:
    """Output of level scaling."""

    mixture: Waveform
    target: Waveform
    gain: float


def sample_augment_spec(rng: np.random.Generator, config: AugmentConfig | None = None) -> AugmentSpec:
    """Draw one example's augmentation parameters.

    Draw order: speech filter, noise filter, SNR, level, example seed.
    Disabled stages fall back to identity filters, a uniform choice among the
    discrete SNRs, or the mean level.

    Args:
        rng: Seeded generator.
        config: Distribution parameters (defaults: SNR N(5, 10^2) dB, level
            N(-28, 10^2) dBFS, r_i ~ U[-3/8, 3/8]).

    Returns:
        Sampled AugmentSpec (noise offset left to the example seed).
    """
    config = config or AugmentConfig()

    if config.spectral:
        speech_filter = sample_biquad(rng, config.biquad_bound)
        noise_filter = sample_biquad(rng, config.biquad_bound)
    else:
        speech_filter = BiquadCoeffs.identity()
        noise_filter = BiquadCoeffs.identity()

    if config.snr_mode == "gaussian":
        snr_db = float(rng.normal(config.snr_mean_db, config.snr_std_db))
    else:
        snr_db = float(config.snr_choices_db[int(rng.integers(len(config.snr_choices_db)))])

    if config.level:
        level_dbfs = float(rng.normal(config.level_mean_dbfs, config.level_sigma_db))
    else:
        level_dbfs = float(config.level_mean_dbfs)

    seed = int(rng.integers(0, _SEED_LIMIT))
    return AugmentSpec(speech_filter, noise_filter, snr_db, level_dbfs, seed)


def resolve_noise_offset(spec: AugmentSpec, noise_len: int, speech_len: int) -> int:
    """Crop offset for the noise, drawn from the example seed unless recorded.

    Raises:
        NoiseTooShortError: If the noise cannot cover the speech.
    """
    if noise_len < speech_len:
        raise NoiseTooShortError(noise_len, speech_len)
    slack = noise_len - speech_len
    if spec.noise_offset is not None:
        if spec.noise_offset > slack:
            raise NoiseTooShortError(noise_len - spec.noise_offset, speech_len)
        return spec.noise_offset
    return int(np.random.default_rng(spec.seed).integers(0, slack + 1))


def mix_at_snr(
    speech: Waveform,
    noise: Waveform,
    snr_db: float,
    vad: VadConfig | None = None,
    noise_offset: int = 0,
) -> MixResult:
    """Add noise scaled so the active SNR equals ``snr_db``.

    The noise gain g satisfies ``20 log10(sigma_speech / (g sigma_noise)) =
    snr_db``, with both levels measured on active frames only.

    Args:
        speech: Speech signal.
        noise: Noise signal at least as long as the speech.
        snr_db: Target active SNR.
        vad: VAD settings for the level measurement.
        noise_offset: Start of the noise segment used when noise is longer.

    Returns:
        The mixture, the noise gain and the measured source levels.

    Raises:
        NoiseTooShortError: If the noise segment cannot cover the speech.
        NoActiveFramesError: If either source has no active frame.
    """
    vad = vad or VadConfig()
    if len(noise) - noise_offset < len(speech):
        raise NoiseTooShortError(len(noise) - noise_offset, len(speech))
    noise = noise.segment(noise_offset, len(speech))

    speech_sigma = active_level(speech, vad).sigma
    noise_sigma = active_level(noise, vad).sigma
    gain = speech_sigma / (noise_sigma * 10.0 ** (snr_db / 20.0))

    scaled_noise = noise.samples * gain
    mixture = Waveform(speech.samples + scaled_noise, speech.sample_rate_hz)
    return MixResult(
        mixture=mixture,
        noise_gain=gain,
        scaled_noise=Waveform(scaled_noise, speech.sample_rate_hz),
        speech_sigma=speech_sigma,
        noise_sigma=noise_sigma,
    )


def scale_to_level(
    mix: Waveform, target: Waveform, level_dbfs: float, vad: VadConfig | None = None
) -> LevelScaleResult:
    """Scale mixture and target by one gain so the target sits at ``level_dbfs``.

    Raises:
        NoActiveFramesError: If the target has no active frame.
    """
    sigma = active_level(target, vad).sigma
    gain = 10.0 ** (level_dbfs / 20.0) / sigma
    return LevelScaleResult(mixture=mix.scaled(gain), target=target.scaled(gain), gain=gain)


def synthesize_example(
    speech: Waveform,
    noise: Waveform,
    spec: AugmentSpec,
    vad: VadConfig | None = None,
    provenance: ExampleProvenance | None = None,
) -> MixedExample:
    """Run the full augmentation pipeline for one (speech, noise, spec) triple.

    Args:
        speech: Clean speech source.
        noise: Noise source, at least as long as the speech.
        spec: Augmentation parameters.
        vad: VAD settings.
        provenance: Optional source bookkeeping carried into the result.

    Returns:
        The augmented example; ``spec.noise_offset`` is always resolved.

    Raises:
        NoiseTooShortError: If the noise is shorter than the speech.
        NoActiveFramesError: If a source has no active frame after filtering.
        UnstableFilterError: If a recorded filter is unstable.
    """
    vad = vad or VadConfig()
    offset = resolve_noise_offset(spec, len(noise), len(speech))
    spec = replace(spec, noise_offset=offset)
    noise = noise.segment(offset, len(speech))

    shaped_speech = apply_biquad(speech, spec.speech_filter)
    shaped_noise = apply_biquad(noise, spec.noise_filter)

    mixed = mix_at_snr(shaped_speech, shaped_noise, spec.snr_db, vad)
    scaled = scale_to_level(mixed.mixture, shaped_speech, spec.level_dbfs, vad)

    sigma_s = active_level(scaled.target, vad).sigma
    residual = Waveform(scaled.mixture.samples - scaled.target.samples, speech.sample_rate_hz)
    clipped = int(np.count_nonzero(np.abs(scaled.mixture.samples) > 1.0))
    if clipped:
        logger.info(f"Mixture at {spec.level_dbfs:.1f} dBFS exceeds full scale in {clipped} samples")

    return MixedExample(
        mixture=scaled.mixture,
        target=scaled.target,
        noise=residual,
        spec=spec,
        sigma_s=sigma_s,
        clipped_samples=clipped,
        provenance=provenance,
    )
