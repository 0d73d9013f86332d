import logging
import math

import numpy as np
import pytest

from augnorm.core.biquad import BiquadCoeffs, apply_biquad
from augnorm.core.config import FrameConfig, MetricsConfig
from augnorm.core.dsp import Waveform, istft, stft
from augnorm.core.enhance import apply_gain, oracle_wiener_gain
from augnorm.core.errors import ShapeMismatchError, ZeroReferenceError
from augnorm.core.metrics import (
    MetricReport,
    cepstral_distance,
    evaluate_pair,
    fw_seg_snr,
    lpc_cepstrum,
    seg_snr,
    si_sdr,
    summarize_reports,
)
from tests.helpers import speech, white

CFG = MetricsConfig()


def _colored(seconds: float = 1.0, seed: int = 0) -> Waveform:
    return apply_biquad(white(seconds, seed=seed), BiquadCoeffs(0.3, 0.2, -0.3, 0.2))


def test_si_sdr_perfect_estimate_hits_cap() -> None:
    s = white(0.5)
    assert si_sdr(s, s) == 100.0
    assert si_sdr(s, s.scaled(2.0)) == si_sdr(s, s)


def test_si_sdr_silent_estimate_hits_floor() -> None:
    s = white(1.0, seed=5)
    assert si_sdr(s, Waveform(np.zeros(len(s)))) == -100.0
    assert si_sdr(s, Waveform(np.zeros(len(s))), cap_db=40.0) == -40.0


def test_si_sdr_orthogonal_perturbation() -> None:
    s = white(1.0, seed=1).samples
    w = np.random.default_rng(2).normal(size=s.size)
    w -= np.dot(w, s) / np.dot(s, s) * s
    w *= math.sqrt(np.dot(s, s) / (100.0 * np.dot(w, w)))
    assert si_sdr(Waveform(s), Waveform(s + w)) == pytest.approx(20.0, abs=0.01)


def test_si_sdr_scale_invariance() -> None:
    s = white(1.0, seed=3)
    est = Waveform(s.samples + white(1.0, seed=4, std=0.05).samples)
    base = si_sdr(s, est)
    for a in (0.01, 1.0, 100.0):
        assert si_sdr(s, est.scaled(a)) == pytest.approx(base, abs=1e-6)


def test_pair_checks() -> None:
    with pytest.raises(ZeroReferenceError):
        si_sdr(Waveform(np.zeros(1000)), white(1000 / 16000))
    with pytest.raises(ShapeMismatchError):
        si_sdr(white(0.5), white(0.6))
    with pytest.raises(ZeroReferenceError):
        seg_snr(Waveform(np.zeros(1000)), Waveform(np.ones(1000)))


def test_seg_snr_clamps() -> None:
    s = white(1.0)
    assert seg_snr(s, s) == 35.0
    assert seg_snr(s, Waveform(np.zeros(len(s)))) == pytest.approx(0.0, abs=1e-9)
    assert seg_snr(s, s.scaled(-5.0)) == -10.0


def test_seg_snr_alternating_frames() -> None:
    cfg = MetricsConfig(frame=FrameConfig(fft_size=256, window_len=256, hop=256))
    rng = np.random.default_rng(5)
    ref = rng.normal(size=256 * 20)
    est = ref.copy()
    for f in range(20):
        chunk = slice(f * 256, (f + 1) * 256)
        error = rng.normal(size=256)
        snr_db = 0.0 if f % 2 == 0 else 20.0
        error *= math.sqrt(np.sum(ref[chunk] ** 2) / (10.0 ** (snr_db / 10.0) * np.sum(error**2)))
        est[chunk] = ref[chunk] - error
    assert seg_snr(Waveform(ref), Waveform(est), cfg) == pytest.approx(10.0, abs=0.01)


def test_segmental_metrics_stay_in_clamp_range() -> None:
    rng = np.random.default_rng(6)
    for i in range(10):
        ref = white(0.5, seed=i)
        est = Waveform(rng.normal(0.0, float(rng.uniform(0.001, 1.0)), len(ref)))
        for value in (seg_snr(ref, est, CFG), fw_seg_snr(ref, est, CFG)):
            assert -10.0 <= value <= 35.0


def test_fw_seg_snr_examples() -> None:
    ref = white(1.0, seed=7)
    assert fw_seg_snr(ref, ref) == 35.0
    assert fw_seg_snr(ref, ref.scaled(1.1)) == pytest.approx(20.0, abs=0.5)


def test_fw_seg_snr_falls_with_contamination() -> None:
    ref = white(1.0, seed=8)
    noise = white(1.0, seed=9).samples
    scores = [
        fw_seg_snr(ref, Waveform(ref.samples + noise * 10.0 ** (-snr / 20.0)))
        for snr in (25.0, 18.0, 10.0, 3.0, -3.0)
    ]
    assert all(a > b for a, b in zip(scores, scores[1:], strict=False))


def test_lpc_cepstrum_of_first_order_model() -> None:
    np.testing.assert_allclose(lpc_cepstrum(np.array([1.0, -0.5, 0.0])), [0.5, 0.125])


def test_cepstral_distance_identity_and_gain() -> None:
    ref = _colored(seed=10)
    assert cepstral_distance(ref, ref) == pytest.approx(0.0, abs=1e-9)
    assert cepstral_distance(ref, ref.scaled(3.0)) == pytest.approx(0.0, abs=1e-6)


def test_cepstral_distance_grows_with_tilt() -> None:
    ref = _colored(seed=11)
    distances = [
        cepstral_distance(ref, apply_biquad(ref, BiquadCoeffs(r1=-beta))) for beta in (0.3, 0.6, 0.9)
    ]
    assert distances[0] > 0.0
    assert distances[0] < distances[1] < distances[2]


def test_cepstral_distance_all_frames_skipped(caplog: pytest.LogCaptureFixture) -> None:
    ref = white(0.5)
    with caplog.at_level(logging.WARNING, logger="augnorm.core.metrics"):
        value = cepstral_distance(ref, Waveform(np.zeros(len(ref))))
    assert math.isnan(value)
    assert "No frame usable" in caplog.text


def test_oracle_wiener_improves_every_metric() -> None:
    frame = CFG.frame
    cd_noisy: list[float] = []
    cd_enhanced: list[float] = []
    for i in range(100):
        s = speech(0.5, seed=i)
        n = white(0.5, seed=2000 + i, std=float(np.std(s.samples)))
        x = Waveform(s.samples + n.samples)
        G = oracle_wiener_gain(stft(s, frame), stft(n, frame))
        enhanced = istft(apply_gain(stft(x, frame), G))
        noisy_report = evaluate_pair(s, x, CFG)
        enhanced_report = evaluate_pair(s, enhanced, CFG)
        assert enhanced_report.si_sdr_db > noisy_report.si_sdr_db
        assert enhanced_report.fw_seg_snr_db > noisy_report.fw_seg_snr_db
        cd_noisy.append(noisy_report.cepstral_distance)
        cd_enhanced.append(enhanced_report.cepstral_distance)
    assert np.nanmean(cd_enhanced) < np.nanmean(cd_noisy)


def test_report_rows_and_summary() -> None:
    ref = _colored(seed=12)
    est = Waveform(ref.samples + white(1.0, seed=13, std=0.01).samples)
    report = evaluate_pair(ref, est, CFG, utterance_id="u1", condition="enhanced")
    assert list(report.to_row()) == ["utterance_id", "condition", "si_sdr", "fw_seg_snr", "cd", "seg_snr"]

    other = MetricReport(10.0, 5.0, float("nan"), 3.0, "u2", "enhanced")
    summary = summarize_reports([report, other])
    assert summary["enhanced"]["count"] == 2.0
    assert summary["enhanced"]["si_sdr_db"] == pytest.approx((report.si_sdr_db + 10.0) / 2.0)
    assert summary["enhanced"]["cepstral_distance"] == pytest.approx(report.cepstral_distance)


def test_report_validation() -> None:
    with pytest.raises(ValueError):
        MetricReport(float("nan"), 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        MetricReport(0.0, 0.0, -1.0, 0.0)
