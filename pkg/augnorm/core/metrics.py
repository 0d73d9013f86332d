"""Objective speech quality metrics: SI-SDR, segSNR, fwSegSNR, cepstral distance.

All functions take ``(reference, estimate)`` in that order. Segmental metrics
use the shared framing rule of :mod:`augnorm.core.dsp`.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

import librosa
import numpy as np
from numpy.typing import NDArray

from augnorm.core.config import MetricsConfig
from augnorm.core.dsp import Waveform, frame_signal, stft
from augnorm.core.errors import ShapeMismatchError, ZeroReferenceError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

METRIC_NAMES = ("si_sdr_db", "fw_seg_snr_db", "cepstral_distance", "seg_snr_db")
_CD_SCALE = 10.0 / math.log(10.0)


def _check_pair(reference: Waveform, estimate: Waveform) -> None:
    if len(reference) != len(estimate):
        raise ShapeMismatchError(
            f"Reference has {len(reference)} samples, estimate has {len(estimate)}"
        )
    if not np.any(reference.samples):
        raise ZeroReferenceError("Reference signal is all zeros")


def _clamped_db(signal_power: FloatArray, error_power: FloatArray, floor: float, ceiling: float) -> FloatArray:
    """10 log10(signal/error) clamped; zero error maps to the ceiling."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_db = 10.0 * np.log10(signal_power / error_power)
    ratio_db = np.where(error_power == 0.0, ceiling, ratio_db)
    ratio_db = np.where((error_power > 0.0) & (signal_power == 0.0), floor, ratio_db)
    return np.clip(ratio_db, floor, ceiling)


def si_sdr(reference: Waveform, estimate: Waveform, cap_db: float = 100.0) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    Args:
        reference: Clean reference s.
        estimate: Estimate s_hat of equal length.
        cap_db: Symmetric bound applied to the result.

    Returns:
        ``10 log10(|s_t|^2 / |e|^2)`` with ``s_t`` the projection of the
        estimate onto the reference, limited to ``[-cap_db, cap_db]``.

    Raises:
        ShapeMismatchError: If lengths differ.
        ZeroReferenceError: If the reference is all zeros.
    """
    _check_pair(reference, estimate)
    s = reference.samples
    s_hat = estimate.samples
    alpha = float(np.dot(s_hat, s) / np.dot(s, s))
    target = alpha * s
    residual = s_hat - target
    target_energy = float(np.dot(target, target))
    residual_energy = float(np.dot(residual, residual))
    if target_energy == 0.0:
        return -cap_db
    if residual_energy == 0.0:
        return cap_db
    value = 10.0 * math.log10(target_energy / residual_energy)
    return float(min(max(value, -cap_db), cap_db))


def seg_snr(reference: Waveform, estimate: Waveform, config: MetricsConfig | None = None) -> float:
    """Mean per-frame SNR, each frame clamped to the configured range.

    Raises:
        ShapeMismatchError: If lengths differ.
        ZeroReferenceError: If the reference is all zeros.
        InsufficientLengthError: If shorter than one frame.
    """
    config = config or MetricsConfig()
    _check_pair(reference, estimate)
    ref_frames, _ = frame_signal(reference, config.frame)
    est_frames, _ = frame_signal(estimate, config.frame)
    signal_power = np.sum(ref_frames**2, axis=1)
    error_power = np.sum((ref_frames - est_frames) ** 2, axis=1)
    per_frame = _clamped_db(signal_power, error_power, config.seg_snr_floor_db, config.seg_snr_ceiling_db)
    return float(np.mean(per_frame))


def mel_band_matrix(config: MetricsConfig) -> FloatArray:
    """Mel filterbank ``[fw_bands x n_bins]`` for the configured STFT."""
    frame = config.frame
    return np.asarray(
        librosa.filters.mel(
            sr=frame.sample_rate_hz, n_fft=frame.fft_size, n_mels=config.fw_bands, norm=None
        ),
        dtype=np.float64,
    )


def fw_seg_snr(reference: Waveform, estimate: Waveform, config: MetricsConfig | None = None) -> float:
    """Frequency-weighted segmental SNR on mel-band magnitudes.

    Per frame and band the SNR is ``10 log10(B^2 / (B - B_hat)^2)``, clamped,
    and weighted by ``B^gamma`` where B is the reference band magnitude.
    Frames with no reference energy in any band are left out of the mean.

    Raises:
        ShapeMismatchError: If lengths differ.
        ZeroReferenceError: If the reference is all zeros.
        InsufficientLengthError: If shorter than one frame.
    """
    config = config or MetricsConfig()
    _check_pair(reference, estimate)
    bands = mel_band_matrix(config)
    ref_bands = bands @ np.abs(stft(reference, config.frame).bins)
    est_bands = bands @ np.abs(stft(estimate, config.frame).bins)

    per_band = _clamped_db(
        ref_bands**2, (ref_bands - est_bands) ** 2, config.seg_snr_floor_db, config.seg_snr_ceiling_db
    )
    weights = ref_bands**config.fw_gamma
    weight_sum = np.sum(weights, axis=0)
    used = weight_sum > 0.0
    if not np.any(used):
        raise ZeroReferenceError("Reference has no energy in any mel band")
    per_frame = np.sum(weights[:, used] * per_band[:, used], axis=0) / weight_sum[used]
    return float(np.mean(per_frame))


def lpc_cepstrum(a: FloatArray) -> FloatArray:
    """Cepstral coefficients c_1..c_p of the all-pole model ``1 / A(z)``.

    Args:
        a: Prediction polynomial ``[1, a_1, ..., a_p]``.
    """
    order = len(a) - 1
    c = np.zeros(order + 1, dtype=np.float64)
    for n in range(1, order + 1):
        acc = sum((k / n) * c[k] * a[n - k] for k in range(1, n))
        c[n] = -a[n] - acc
    return c[1:]


def _frame_cepstrum(frame: FloatArray, order: int) -> FloatArray | None:
    if not np.any(frame):
        return None
    try:
        a = np.asarray(librosa.lpc(frame, order=order), dtype=np.float64)
    except FloatingPointError:
        return None
    if not np.all(np.isfinite(a)):
        return None
    roots = np.roots(a)
    if roots.size and np.max(np.abs(roots)) >= 1.0:
        return None
    return lpc_cepstrum(a)


def frame_cepstral_distances(
    reference: Waveform, estimate: Waveform, config: MetricsConfig | None = None
) -> FloatArray:
    """Per-frame cepstral distance; NaN where either frame is silent or its LPC fit unstable.

    Raises:
        ShapeMismatchError: If lengths differ.
        ZeroReferenceError: If the reference is all zeros.
    """
    config = config or MetricsConfig()
    _check_pair(reference, estimate)
    hann = config.frame.window() ** 2
    ref_frames, _ = frame_signal(reference, config.frame)
    est_frames, _ = frame_signal(estimate, config.frame)

    distances = np.full(ref_frames.shape[0], np.nan)
    for n in range(ref_frames.shape[0]):
        c_ref = _frame_cepstrum(ref_frames[n] * hann, config.cd_order)
        c_est = _frame_cepstrum(est_frames[n] * hann, config.cd_order)
        if c_ref is None or c_est is None:
            continue
        distances[n] = _CD_SCALE * math.sqrt(2.0 * float(np.sum((c_ref - c_est) ** 2)))
    return distances


def cepstral_distance(
    reference: Waveform, estimate: Waveform, config: MetricsConfig | None = None
) -> float:
    """Mean LPC cepstral distance over usable frames (c_0 excluded).

    Returns:
        Non-negative distance, or NaN when no frame is usable.
    """
    distances = frame_cepstral_distances(reference, estimate, config)
    skipped = int(np.count_nonzero(np.isnan(distances)))
    if skipped:
        logger.debug(f"Cepstral distance skipped {skipped}/{distances.size} frames")
    if skipped == distances.size:
        logger.warning("No frame usable for cepstral distance")
        return float("nan")
    return float(np.nanmean(distances))


@dataclass(frozen=True, slots=True)
class MetricReport:
    """Objective scores of one (reference, estimate) pair.

    ``cepstral_distance`` is NaN when no frame had a usable LPC fit.
    """

    si_sdr_db: float
    fw_seg_snr_db: float
    cepstral_distance: float
    seg_snr_db: float
    utterance_id: str = ""
    condition: str = ""

    def __post_init__(self) -> None:
        for name in ("si_sdr_db", "fw_seg_snr_db", "seg_snr_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite: {getattr(self, name)}")
        if self.cepstral_distance < 0:
            raise ValueError(f"cepstral_distance must be non-negative: {self.cepstral_distance}")

    def to_row(self) -> dict[str, Any]:
        return {
            "utterance_id": self.utterance_id,
            "condition": self.condition,
            "si_sdr": self.si_sdr_db,
            "fw_seg_snr": self.fw_seg_snr_db,
            "cd": self.cepstral_distance,
            "seg_snr": self.seg_snr_db,
        }


def evaluate_pair(
    reference: Waveform,
    estimate: Waveform,
    config: MetricsConfig | None = None,
    utterance_id: str = "",
    condition: str = "",
) -> MetricReport:
    """Compute every metric for one pair."""
    config = config or MetricsConfig()
    return MetricReport(
        si_sdr_db=si_sdr(reference, estimate, config.si_sdr_cap_db),
        fw_seg_snr_db=fw_seg_snr(reference, estimate, config),
        cepstral_distance=cepstral_distance(reference, estimate, config),
        seg_snr_db=seg_snr(reference, estimate, config),
        utterance_id=utterance_id,
        condition=condition,
    )


def summarize_reports(reports: Iterable[MetricReport]) -> dict[str, dict[str, float]]:
    """Per-condition means of every metric (NaN distances ignored)."""
    grouped: dict[str, list[MetricReport]] = defaultdict(list)
    for report in reports:
        grouped[report.condition].append(report)

    summary: dict[str, dict[str, float]] = {}
    for condition, items in grouped.items():
        stats: dict[str, float] = {}
        for name in METRIC_NAMES:
            values = [float(getattr(r, name)) for r in items if not math.isnan(getattr(r, name))]
            stats[name] = float(np.mean(values)) if values else float("nan")
        stats["count"] = float(len(items))
        summary[condition] = stats
    return summary
