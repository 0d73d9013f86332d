"""Suppression-gain application, log-power features and oracle masks."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from augnorm.core.dsp import Spectrogram
from augnorm.core.errors import ShapeMismatchError

FloatArray = NDArray[np.float64]

FEATURE_EPSILON = 1e-12


def inner_rows(n_bins: int) -> slice:
    """Bins fed to the estimator: DC and Nyquist dropped (255 of 257)."""
    return slice(1, n_bins - 1)


def log_power(X: Spectrogram, epsilon: float = FEATURE_EPSILON) -> FloatArray:
    """Raw ``log10(|X|^2 + eps)`` over the inner bins."""
    return np.log10(np.abs(X.bins[inner_rows(X.config.n_bins)]) ** 2 + epsilon)


@dataclass(frozen=True, slots=True)
class FeatureStats:
    """Scalar global mean and variance of raw log-power features."""

    mean: float
    var: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.mean) or not np.isfinite(self.var) or self.var < 0:
            raise ValueError(f"Invalid feature stats: mean={self.mean}, var={self.var}")

    @property
    def std(self) -> float:
        # Floor keeps constant-valued feature sets finite after normalization
        return float(np.sqrt(max(self.var, FEATURE_EPSILON)))

    def normalize(self, raw: FloatArray) -> FloatArray:
        return (raw - self.mean) / self.std

    def denormalize(self, values: FloatArray) -> FloatArray:
        return values * self.std + self.mean

    @classmethod
    def fit(cls, spectra: Iterable[Spectrogram], epsilon: float = FEATURE_EPSILON) -> FeatureStats:
        """Global statistics over every inner bin of every spectrogram.

        Raises:
            ValueError: If no spectrogram is given.
        """
        total = 0.0
        total_sq = 0.0
        count = 0
        for spec in spectra:
            raw = log_power(spec, epsilon)
            total += float(np.sum(raw))
            total_sq += float(np.sum(raw**2))
            count += raw.size
        if count == 0:
            raise ValueError("Cannot fit feature stats on an empty set")
        mean = total / count
        return cls(mean=mean, var=max(total_sq / count - mean**2, 0.0))

    def to_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "var": self.var}


@dataclass(frozen=True, eq=False, slots=True)
class FeatureMatrix:
    """Normalized log-power features ``[255 x frames]`` and the stats used."""

    values: FloatArray
    stats: FeatureStats

    def raw(self) -> FloatArray:
        """Undo the normalization."""
        return self.stats.denormalize(self.values)


def extract_features(
    X: Spectrogram, stats: FeatureStats | None = None, epsilon: float = FEATURE_EPSILON
) -> FeatureMatrix:
    """Log-power features of the (un-normalized) noisy spectrum.

    Args:
        X: Noisy spectrogram.
        stats: Global training-set stats; computed from X alone when absent.
        epsilon: Floor inside the logarithm.

    Returns:
        FeatureMatrix with rows 1..fft_size/2-1.
    """
    raw = log_power(X, epsilon)
    if stats is None:
        stats = FeatureStats(mean=float(np.mean(raw)), var=float(np.var(raw)))
    return FeatureMatrix(values=stats.normalize(raw), stats=stats)


@dataclass(frozen=True, eq=False, slots=True)
class GainMask:
    """Real suppression gain ``[257 x frames]``; DC and Nyquist rows pass through."""

    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] < 3:
            raise ValueError(f"GainMask must be a [bins x frames] matrix, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("GainMask entries must be finite")
        values[0, :] = 1.0
        values[-1, :] = 1.0
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))

    @property
    def inner(self) -> FloatArray:
        return self.values[inner_rows(self.shape[0])]

    @classmethod
    def from_inner(cls, inner: ArrayLike) -> GainMask:
        """Build a full mask from the 255 estimated rows."""
        inner_array = np.asarray(inner, dtype=np.float64)
        full = np.ones((inner_array.shape[0] + 2, inner_array.shape[1]), dtype=np.float64)
        full[1:-1] = inner_array
        return cls(full)


def apply_gain(X: Spectrogram, G: GainMask) -> Spectrogram:
    """S_hat(k, n) = G(k, n) X(k, n).

    Raises:
        ShapeMismatchError: If mask and spectrogram shapes differ.
    """
    if G.shape != X.shape:
        raise ShapeMismatchError(f"Mask shape {G.shape} does not match spectrogram {X.shape}")
    return X.with_bins(G.values * X.bins)


def oracle_wiener_gain(S: Spectrogram, N: Spectrogram, epsilon: float = FEATURE_EPSILON) -> GainMask:
    """Ideal Wiener gain ``|S|^2 / (|S|^2 + |N|^2 + eps)`` from known components.

    Raises:
        ShapeMismatchError: If the component shapes differ.
    """
    if S.shape != N.shape:
        raise ShapeMismatchError(f"Speech {S.shape} and noise {N.shape} spectra differ")
    ps = np.abs(S.bins) ** 2
    pn = np.abs(N.bins) ** 2
    return GainMask(ps / (ps + pn + epsilon))
