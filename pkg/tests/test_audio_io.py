import logging
from pathlib import Path

import numpy as np
import pytest
import soundfile as sf

from augnorm.core.audio_io import read_wav, wav_info, write_wav
from augnorm.core.dsp import Waveform
from augnorm.core.errors import AudioFormatError
from tests.helpers import white


def test_float_wav_round_trip_is_exact(tmp_path: Path) -> None:
    w = Waveform(np.random.default_rng(0).normal(0.0, 0.5, 1600))
    path = write_wav(tmp_path / "nested" / "a.wav", w)
    back = read_wav(path)
    np.testing.assert_array_equal(back.samples, w.samples.astype(np.float32).astype(np.float64))
    info = wav_info(path)
    assert info.channels == 1
    assert info.frames == 1600
    assert info.duration_s == pytest.approx(0.1)


def test_float_wav_keeps_values_beyond_full_scale(tmp_path: Path) -> None:
    path = write_wav(tmp_path / "loud.wav", Waveform(np.array([0.0, 1.5, -2.0])))
    assert np.max(np.abs(read_wav(path).samples)) == 2.0


def test_pcm16_clips_with_warning(tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="augnorm.core.audio_io"):
        path = write_wav(tmp_path / "pcm.wav", Waveform(np.array([0.0, 1.5, -2.0])), "PCM_16")
    assert "Clipping" in caplog.text
    assert np.max(np.abs(read_wav(path).samples)) <= 1.0


def test_rejects_stereo_and_wrong_rate(tmp_path: Path) -> None:
    stereo = tmp_path / "stereo.wav"
    sf.write(str(stereo), np.zeros((100, 2)), 16000)
    with pytest.raises(AudioFormatError, match="channels"):
        read_wav(stereo)

    path = write_wav(tmp_path / "8k.wav", white(0.1, sr=8000))
    with pytest.raises(AudioFormatError, match="8000"):
        read_wav(path)
    assert read_wav(path, sample_rate_hz=None).sample_rate_hz == 8000


def test_rejects_garbage(tmp_path: Path) -> None:
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"not a wav file")
    with pytest.raises(AudioFormatError):
        read_wav(bad)
    with pytest.raises(AudioFormatError):
        wav_info(tmp_path / "missing.wav")
