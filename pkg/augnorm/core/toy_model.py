"""Per-frame affine mask estimator trained by plain gradient descent.

The model maps the 255 normalized log-power features of a frame to 255 gains
through ``sigmoid(W f + b)``. Training backpropagates the analytic loss
gradient dL/dG through the sigmoid into W and b:

    delta = dL/dG * g (1 - g),   dW = delta F^T,   db = sum_n delta

Features always come from the un-normalized mixture; the loss mode only
changes how S and X are scaled inside the loss.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from augnorm.core.augment import MixedExample
from augnorm.core.config import FrameConfig, LossConfig, MetricsConfig, TrainConfig
from augnorm.core.dsp import Waveform, istft, stft
from augnorm.core.enhance import FeatureStats, GainMask, apply_gain, extract_features
from augnorm.core.errors import AugnormError, EmptyCorpusError, TrainingDivergedError
from augnorm.core.loss import LossReport, batch_loss, gain_loss
from augnorm.core.metrics import si_sdr

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Batch = Sequence[MixedExample]
BatchSource = Callable[[int], Iterable[Batch]] | Sequence[Batch]

CHECKPOINT_VERSION = 1


@dataclass(frozen=True, eq=False, slots=True)
class ToyMaskModel:
    """Affine 255 -> 255 gain estimator with sigmoid output.

    Attributes:
        weights: ``[255 x 255]`` weight matrix.
        bias: ``[255]`` bias vector.
        stats: Feature normalization stats the model was trained with.
        loss_mode: ``standard`` or ``normalized``.
    """

    weights: FloatArray
    bias: FloatArray
    stats: FeatureStats | None = None
    loss_mode: str = "standard"

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        bias = np.array(self.bias, dtype=np.float64, copy=True)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise ValueError(f"weights must be square, got {weights.shape}")
        if bias.shape != (weights.shape[0],):
            raise ValueError(f"bias shape {bias.shape} does not match weights {weights.shape}")
        if self.loss_mode not in ("standard", "normalized"):
            raise ValueError(f"Unknown loss mode: {self.loss_mode}")
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @classmethod
    def initialize(
        cls,
        n_features: int = 255,
        init_scale: float = 0.01,
        seed: int = 0,
        loss_mode: str = "standard",
    ) -> ToyMaskModel:
        """Gaussian weights N(0, init_scale^2) from ``seed``, zero bias."""
        rng = np.random.default_rng(seed)
        weights = rng.normal(0.0, init_scale, size=(n_features, n_features))
        return cls(weights, np.zeros(n_features), loss_mode=loss_mode)

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.weights.size + self.bias.size)

    def inner_gains(self, features: FloatArray) -> FloatArray:
        """Gains for the estimated rows, shape ``[255 x frames]``."""
        return np.asarray(expit(self.weights @ features + self.bias[:, None]), dtype=np.float64)

    def forward(self, features: FloatArray) -> GainMask:
        """Full gain mask with DC and Nyquist passed through."""
        return GainMask.from_inner(self.inner_gains(features))

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": CHECKPOINT_VERSION,
            "loss_mode": self.loss_mode,
            "parameter_count": self.parameter_count,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "feature_stats": None if self.stats is None else self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ToyMaskModel:
        stats_data = data.get("feature_stats")
        stats = None if stats_data is None else FeatureStats(**stats_data)
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            bias=np.asarray(data["bias"], dtype=np.float64),
            stats=stats,
            loss_mode=str(data.get("loss_mode", "standard")),
        )

    def save(self, path: Path | str) -> None:
        """Write the checkpoint as JSON.

        Raises:
            AugnormError: If the file cannot be written.
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        except OSError as e:
            raise AugnormError(f"Failed to write checkpoint {path}: {e}") from e

    @classmethod
    def load(cls, path: Path | str) -> ToyMaskModel:
        """Read a JSON checkpoint.

        Raises:
            AugnormError: If the file is missing or malformed.
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return cls.from_dict(data)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise AugnormError(f"Failed to load checkpoint {path}: {e}") from e


@dataclass(frozen=True, slots=True)
class EpochRecord:
    """Loss and validation score after one epoch (1-based)."""

    epoch: int
    loss: float
    val_si_sdr: float
    examples: int = 0

    def to_row(self) -> dict[str, Any]:
        return {"epoch": self.epoch, "loss": self.loss, "val_si_sdr": self.val_si_sdr}


@dataclass(slots=True)
class TrainingTrace:
    """Per-epoch history of a training run."""

    loss_mode: str
    records: list[EpochRecord] = field(default_factory=list)
    initial_val_si_sdr: float = float("nan")

    @property
    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    @property
    def val_si_sdr(self) -> list[float]:
        return [r.val_si_sdr for r in self.records]

    @property
    def final_val_si_sdr(self) -> float:
        if not self.records:
            return self.initial_val_si_sdr
        return self.records[-1].val_si_sdr

    def to_rows(self, condition: str | None = None) -> list[dict[str, Any]]:
        rows = [r.to_row() for r in self.records]
        if condition is not None:
            rows = [{"condition": condition, **row} for row in rows]
        return rows


def enhance_waveform(
    x: Waveform,
    model: ToyMaskModel,
    stats: FeatureStats | None = None,
    frame: FrameConfig | None = None,
) -> Waveform:
    """Features -> model -> gain -> resynthesis for one noisy waveform.

    Args:
        x: Noisy input.
        model: Trained estimator.
        stats: Feature stats; defaults to the model's own.
        frame: STFT framing.

    Returns:
        Enhanced waveform of the input length.
    """
    X = stft(x, frame or FrameConfig(sample_rate_hz=x.sample_rate_hz))
    features = extract_features(X, stats or model.stats)
    return istft(apply_gain(X, model.forward(features.values)), len(x))


def validation_si_sdr(
    model: ToyMaskModel,
    examples: Sequence[MixedExample],
    stats: FeatureStats | None,
    frame: FrameConfig,
) -> float:
    """Mean SI-SDR of the enhanced validation mixtures against their targets."""
    if not examples:
        return float("nan")
    cap = MetricsConfig().si_sdr_cap_db
    scores = [
        si_sdr(ex.target, enhance_waveform(ex.mixture, model, stats, frame), cap) for ex in examples
    ]
    return float(np.mean(scores))


def _example_gradient(
    model: ToyMaskModel,
    example: MixedExample,
    stats: FeatureStats,
    loss_cfg: LossConfig,
    normalized: bool,
    frame: FrameConfig,
) -> tuple[LossReport, FloatArray, FloatArray]:
    X = stft(example.mixture, frame)
    S = stft(example.target, frame)
    features = extract_features(X, stats).values
    g = model.inner_gains(features)
    G = GainMask.from_inner(g)
    report = gain_loss(S, X, G.values, loss_cfg, normalized, example.sigma_s)
    assert report.grad_gain is not None
    delta = report.grad_gain[1:-1] * g * (1.0 - g)
    return report, delta @ features.T, np.sum(delta, axis=1)


def _epoch_batches(source: BatchSource, epoch: int) -> list[Batch]:
    if callable(source):
        return [list(batch) for batch in source(epoch)]
    return [list(batch) for batch in source]


def train_toy_model(
    batches: BatchSource,
    cfg: LossConfig | None = None,
    normalized: bool = False,
    opt: TrainConfig | None = None,
    validation: Sequence[MixedExample] = (),
    stats: FeatureStats | None = None,
    model: ToyMaskModel | None = None,
    frame: FrameConfig | None = None,
    seed: int = 0,
) -> tuple[ToyMaskModel, TrainingTrace]:
    """Fit the toy estimator with full-batch gradient descent per batch.

    Args:
        batches: Either a callable ``epoch -> batches`` (fresh on-the-fly data
            per epoch, epoch counted from 0) or a fixed sequence of batches
            reused every epoch.
        cfg: Loss parameters.
        normalized: Evaluate the loss on ``S / sigma_s`` and ``X / sigma_s``.
        opt: Epochs, learning rate and initialization.
        validation: Held-out examples scored by SI-SDR after each epoch.
        stats: Global feature stats; fitted on the first epoch's mixtures
            when absent.
        model: Starting point; a seeded initialization when absent.
        frame: STFT framing.
        seed: Initialization seed.

    Returns:
        The trained model and its per-epoch trace.

    Raises:
        EmptyCorpusError: If an epoch yields no example.
        TrainingDivergedError: If an epoch loss or a parameter stops being finite.
    """
    cfg = cfg or LossConfig()
    opt = opt or TrainConfig()
    frame = frame or FrameConfig()
    loss_mode = "normalized" if normalized else "standard"
    if model is None:
        model = ToyMaskModel.initialize(init_scale=opt.init_scale, seed=seed, loss_mode=loss_mode)
    loss_cfg = cfg.model_copy(update={"reduction": "mean"}) if opt.per_bin_mean else cfg
    stats = stats or model.stats

    trace = TrainingTrace(loss_mode=loss_mode)
    if opt.epochs == 0:
        trace.initial_val_si_sdr = validation_si_sdr(model, validation, stats, frame)
        return model, trace

    weights = np.array(model.weights)
    bias = np.array(model.bias)

    for epoch in range(opt.epochs):
        epoch_batches = _epoch_batches(batches, epoch)
        if not any(epoch_batches):
            raise EmptyCorpusError(f"No training examples in epoch {epoch + 1}")
        if stats is None:
            stats = FeatureStats.fit(
                (stft(ex.mixture, frame) for batch in epoch_batches for ex in batch),
                opt.feature_epsilon,
            )
        if epoch == 0:
            trace.initial_val_si_sdr = validation_si_sdr(model, validation, stats, frame)

        batch_values: list[float] = []
        n_examples = 0
        for batch in epoch_batches:
            if not batch:
                continue
            current = ToyMaskModel(weights, bias, stats, loss_mode)
            reports: list[LossReport] = []
            grad_w = np.zeros_like(weights)
            grad_b = np.zeros_like(bias)
            for example in batch:
                report, dw, db = _example_gradient(current, example, stats, loss_cfg, normalized, frame)
                reports.append(report)
                grad_w += dw
                grad_b += db
            batch_values.append(batch_loss(reports))
            n_examples += len(batch)
            weights -= opt.learning_rate * grad_w / len(batch)
            bias -= opt.learning_rate * grad_b / len(batch)

        epoch_loss = float(np.mean(batch_values)) if batch_values else float("nan")
        if not math.isfinite(epoch_loss) or not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            logger.error(f"Training diverged in epoch {epoch + 1} (loss={epoch_loss})")
            raise TrainingDivergedError(epoch + 1, epoch_loss)

        model = ToyMaskModel(weights, bias, stats, loss_mode)
        val = validation_si_sdr(model, validation, stats, frame)
        trace.records.append(EpochRecord(epoch + 1, epoch_loss, val, n_examples))
        logger.info(
            f"[{loss_mode}] epoch {epoch + 1}/{opt.epochs}: loss={epoch_loss:.6g} val_si_sdr={val:.2f} dB"
        )

    return model, trace
