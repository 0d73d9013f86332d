"""Toy-scale level-augmentation experiment.

Trains the toy mask estimator under each augmentation stage and scores every
run on one shared validation set without level augmentation:

- ``none+standard``: discrete SNRs only
- ``snr+standard``: continuous Gaussian SNR
- ``snr_spec+standard``: plus spectral shaping
- ``snr_spec_level+standard``: plus level augmentation
- ``snr_spec_level+normalized``: plus level augmentation, normalized loss
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

from augnorm.core.augment import MixedExample
from augnorm.core.config import AugmentPreset, BatchPlan, Config
from augnorm.core.corpus import BatchGenerator, SourceCache
from augnorm.core.manifest import Manifest
from augnorm.core.toy_model import ToyMaskModel, TrainingTrace, train_toy_model

logger = logging.getLogger(__name__)

COMPARE_CONDITIONS: tuple[tuple[AugmentPreset, bool], ...] = (
    ("none", False),
    ("snr", False),
    ("snr_spec", False),
    ("snr_spec_level", False),
    ("snr_spec_level", True),
)


def condition_name(preset: AugmentPreset, normalized: bool) -> str:
    return f"{preset}+{'normalized' if normalized else 'standard'}"


@dataclass(frozen=True, eq=False, slots=True)
class ToyRun:
    """One trained condition."""

    condition: str
    model: ToyMaskModel
    trace: TrainingTrace

    def curve_rows(self) -> list[dict[str, Any]]:
        return self.trace.to_rows(self.condition)


def validation_examples(
    speech: Manifest,
    noise: Manifest,
    config: Config,
    seed: int,
    cache: SourceCache | None = None,
) -> list[MixedExample]:
    """Held-out examples drawn from their own seed stream, level fixed at the mean."""
    plan = BatchPlan(
        global_seed=seed + 1,
        batch_size=config.train.validation_examples,
        examples_per_epoch=config.train.validation_examples,
    )
    augment = config.augment.model_copy(update={"level": False})
    generator = BatchGenerator(speech, noise, plan, augment, config.vad, cache=cache)
    return list(generator.examples(0))


def run_toy_condition(
    speech: Manifest,
    noise: Manifest,
    config: Config,
    preset: AugmentPreset,
    normalized: bool,
    seed: int = 0,
    jobs: int = 1,
    validation: list[MixedExample] | None = None,
    cache: SourceCache | None = None,
) -> ToyRun:
    """Train one condition on on-the-fly batches.

    Args:
        speech: Speech sources.
        noise: Noise sources.
        config: Full configuration (augmentation, loss, training, VAD).
        preset: Augmentation stages of the training batches; the
            distributions come from ``config.augment``.
        normalized: Use the level-normalized loss.
        seed: Seed of the batch stream and of the model initialization.
        jobs: Worker threads for example synthesis.
        validation: Shared validation set; drawn from ``seed`` when absent.
        cache: Shared decoded-audio cache.

    Returns:
        The trained run.
    """
    cache = cache or SourceCache()
    if validation is None:
        validation = validation_examples(speech, noise, config, seed, cache)
    plan = BatchPlan(
        global_seed=seed,
        batch_size=config.train.batch_size,
        examples_per_epoch=config.train.examples_per_epoch,
    )
    augment = config.augment.with_preset(preset)
    generator = BatchGenerator(speech, noise, plan, augment, config.vad, jobs, cache)
    name = condition_name(preset, normalized)
    logger.info(f"Training toy model: {name} (seed {seed})")
    model, trace = train_toy_model(
        generator,
        config.loss,
        normalized=normalized,
        opt=config.train,
        validation=validation,
        frame=config.frame,
        seed=seed,
    )
    if generator.skipped:
        logger.warning(f"{name}: skipped {generator.skipped} training example(s)")
    return ToyRun(name, model, trace)


def compare_conditions(
    speech: Manifest,
    noise: Manifest,
    config: Config,
    seed: int = 0,
    jobs: int = 1,
) -> list[ToyRun]:
    """Train every comparison condition with the same seed and validation set."""
    cache = SourceCache()
    validation = validation_examples(speech, noise, config, seed, cache)
    return [
        run_toy_condition(
            speech, noise, config, preset, normalized, seed, jobs, validation, cache
        )
        for preset, normalized in COMPARE_CONDITIONS
    ]
