import numpy as np
import pytest

from augnorm.core.config import FrameConfig
from augnorm.core.dsp import (
    Spectrogram,
    Waveform,
    frame_count,
    frame_rms,
    interior_slice,
    istft,
    stft,
)
from augnorm.core.errors import InsufficientLengthError, ShapeMismatchError
from tests.helpers import sine, white

CFG = FrameConfig()


def test_default_frame_geometry() -> None:
    assert CFG.n_bins == 257
    assert CFG.window_ms == pytest.approx(32.0)
    assert CFG.hop_ms == pytest.approx(16.0)
    assert FrameConfig.from_ms(32.0, 16.0, 16000) == CFG


def test_frame_count_pads_tail() -> None:
    assert frame_count(512, CFG) == 1
    assert frame_count(768, CFG) == 2
    assert frame_count(16000, CFG) == 62
    with pytest.raises(InsufficientLengthError):
        frame_count(511, CFG)


def test_stft_shape_and_short_signal() -> None:
    spec = stft(white(1.0), CFG)
    assert spec.shape == (257, 62)
    assert spec.length == 16000
    with pytest.raises(InsufficientLengthError):
        stft(Waveform(np.ones(100)), CFG)


def test_dc_concentrates_at_bin_zero() -> None:
    spec = stft(Waveform(np.ones(4096)), CFG)
    mags = np.abs(spec.bins)
    assert np.all(np.argmax(mags, axis=0) == 0)
    # Square-root Hann leakage falls off as 1 / (4 k^2 - 1)
    ratio = mags[:, 0] / mags[0, 0]
    assert ratio[1] == pytest.approx(1.0 / 3.0, rel=1e-2)
    assert np.all(ratio[32:] < 1e-3)


def test_bin_centred_tone_peaks_at_bin_8() -> None:
    spec = stft(sine(250.0, 1.0), CFG)
    full = spec.bins[:, :-1]
    assert np.all(np.argmax(np.abs(full), axis=0) == 8)


def test_round_trip_interior() -> None:
    w = white(1.0, seed=3)
    spec = stft(w, CFG)
    y = istft(spec)
    assert len(y) == len(w)
    inner = interior_slice(spec.n_frames, CFG)
    err = np.linalg.norm(y.samples[inner] - w.samples[inner])
    assert err / np.linalg.norm(w.samples[inner]) <= 1e-6


@pytest.mark.parametrize("hop", [128, 64])
def test_round_trip_interior_at_finer_hops(hop: int) -> None:
    cfg = FrameConfig(hop=hop)
    assert cfg.is_cola
    assert cfg.overlap_gain == 512 / (2 * hop)
    w = white(2.0, seed=6)
    spec = stft(w, cfg)
    y = istft(spec)
    inner = interior_slice(spec.n_frames, cfg)
    err = np.linalg.norm(y.samples[inner] - w.samples[inner])
    assert err / np.linalg.norm(w.samples[inner]) <= 1e-6


def test_istft_then_stft_matches_on_interior_frames() -> None:
    spec = stft(white(1.0, seed=4), CFG)
    again = stft(istft(spec), CFG)
    inner = slice(1, spec.n_frames - 1)
    np.testing.assert_allclose(again.bins[:, inner], spec.bins[:, inner], atol=1e-6)


def test_istft_of_silence_is_silence() -> None:
    y = istft(stft(Waveform(np.zeros(4096)), CFG))
    assert not np.any(y.samples)


def test_single_frame_impulse_returns_windowed_impulse() -> None:
    samples = np.zeros(512)
    samples[100] = 1.0
    y = istft(stft(Waveform(samples), CFG))
    expected = np.zeros(512)
    expected[100] = CFG.window()[100] ** 2
    np.testing.assert_allclose(y.samples, expected, atol=1e-12)


def test_istft_rejects_wrong_row_count() -> None:
    with pytest.raises(ShapeMismatchError):
        Spectrogram(np.zeros((128, 4), dtype=complex), CFG)


def test_parseval_per_frame() -> None:
    w = Waveform(np.random.default_rng(5).normal(size=4096))
    spec = stft(w, CFG)
    weights = np.full(CFG.n_bins, 2.0)
    weights[0] = weights[-1] = 1.0
    spectral = np.sum(weights[:, None] * np.abs(spec.bins) ** 2)
    frames = np.lib.stride_tricks.sliding_window_view(w.samples, 512)[::256]
    temporal = CFG.fft_size * np.sum((frames * CFG.window()) ** 2)
    assert spectral == pytest.approx(temporal, rel=1e-6)


def test_linearity() -> None:
    w1 = white(0.5, seed=1)
    w2 = white(0.5, seed=2)
    combined = stft(Waveform(2.0 * w1.samples - 0.5 * w2.samples), CFG).bins
    expected = 2.0 * stft(w1, CFG).bins - 0.5 * stft(w2, CFG).bins
    np.testing.assert_allclose(combined, expected, rtol=1e-9, atol=1e-12)


def test_squared_window_overlap_adds_to_one() -> None:
    assert CFG.is_cola
    acc = np.zeros(10 * 256 + 512)
    for m in range(11):
        acc[m * 256 : m * 256 + 512] += CFG.window() ** 2
    np.testing.assert_allclose(acc[256 : 11 * 256], 1.0, atol=1e-9)


def test_frame_rms_examples() -> None:
    assert np.allclose(frame_rms(Waveform(np.full(2000, 0.3)), CFG), 0.3)
    assert not np.any(frame_rms(Waveform(np.zeros(2000)), CFG))
    rms = frame_rms(sine(1000.0, 1.0), CFG)
    assert len(rms) == frame_count(16000, CFG)
    np.testing.assert_allclose(rms[:-1], 1.0 / np.sqrt(2.0), rtol=1e-2)


def test_waveform_validation() -> None:
    with pytest.raises(ValueError):
        Waveform(np.ones((2, 2)))
    with pytest.raises(ValueError):
        Waveform(np.array([0.0, np.nan]))
    w = Waveform(np.ones(4))
    with pytest.raises(ValueError):
        w.samples[0] = 2.0
