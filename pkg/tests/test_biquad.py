import numpy as np
import pytest
from scipy.stats import kstest

from augnorm.core.biquad import BiquadCoeffs, apply_biquad, sample_biquad
from augnorm.core.dsp import Waveform
from augnorm.core.errors import UnstableFilterError
from tests.helpers import white


def _draws(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([list(sample_biquad(rng).to_dict().values()) for _ in range(n)])


def test_same_seed_same_coefficients() -> None:
    a = sample_biquad(np.random.default_rng(42))
    b = sample_biquad(np.random.default_rng(42))
    assert a == b


def test_coefficients_are_uniform_on_bound() -> None:
    r = _draws(100_000)
    assert np.all(np.abs(r.mean(axis=0)) < 0.01)
    assert r.min() >= -0.375
    assert r.max() <= 0.375
    for i in range(4):
        assert kstest(r[:, i], "uniform", args=(-0.375, 0.75)).statistic < 0.01


def test_all_sampled_filters_are_stable() -> None:
    r = _draws(100_000, seed=1)
    r3 = r[:, 2].astype(complex)
    r4 = r[:, 3].astype(complex)
    disc = np.sqrt(r3**2 - 4.0 * r4)
    poles = np.stack([(-r3 + disc) / 2.0, (-r3 - disc) / 2.0])
    assert np.max(np.abs(poles)) < 1.0


def test_identity_filter_passes_signal() -> None:
    w = white(0.1)
    y = apply_biquad(w, BiquadCoeffs.identity())
    np.testing.assert_array_equal(y.samples, w.samples)


def test_fir_impulse_response() -> None:
    impulse = np.zeros(8)
    impulse[0] = 1.0
    y = apply_biquad(Waveform(impulse), BiquadCoeffs(0.375, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(y.samples, [1.0, 0.375, 0, 0, 0, 0, 0, 0])


def test_impulse_response_matches_frequency_response() -> None:
    rng = np.random.default_rng(7)
    impulse = np.zeros(8192)
    impulse[0] = 1.0
    for _ in range(200):
        c = sample_biquad(rng)
        h = apply_biquad(Waveform(impulse), c).samples
        expected = c.frequency_response(8192, whole=True)
        assert np.max(np.abs(np.fft.fft(h) - expected)) < 1e-6


def test_unstable_filter_rejected() -> None:
    c = BiquadCoeffs(0.0, 0.0, 0.0, 1.2)
    assert not c.is_stable
    with pytest.raises(UnstableFilterError):
        apply_biquad(white(0.1), c)


def test_coefficients_dict_and_bounds() -> None:
    c = BiquadCoeffs(0.1, -0.2, 0.3, -0.375)
    assert BiquadCoeffs.from_dict(c.to_dict()) == c
    assert c.within()
    assert not BiquadCoeffs(0.5).within()
    with pytest.raises(ValueError):
        BiquadCoeffs(float("nan"))
