"""Compressed complex spectral loss, its level-normalized form, and dL/dG.

For a spectrum Z the compressed value is ``max(|Z|, eps)^(c-1) * Z``, which
equals ``|Z|^c e^{j phi_Z}`` wherever ``|Z| >= eps`` and goes smoothly to zero
at Z = 0. The loss blends the complex-domain and magnitude-domain squared
errors of the compressed spectra:

    L = alpha * sum |C(S) - C(S_hat)|^2 + (1 - alpha) * sum (|C(S)| - |C(S_hat)|)^2

The normalized variant divides S and X by the target's active level before
evaluation, which makes the loss exactly invariant to the utterance level.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from augnorm.core.config import LossConfig
from augnorm.core.dsp import Spectrogram
from augnorm.core.errors import NonPositiveSigmaError, ShapeMismatchError

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True, eq=False, slots=True)
class LossReport:
    """Loss value, its gain gradient (when computed) and the term breakdown.

    ``value == alpha * complex_term + (1 - alpha) * magnitude_term``.
    """

    value: float
    complex_term: float
    magnitude_term: float
    grad_gain: FloatArray | None = None

    @property
    def terms(self) -> tuple[float, float]:
        return (self.complex_term, self.magnitude_term)


def _as_complex(x: Spectrogram | ArrayLike) -> ComplexArray:
    if isinstance(x, Spectrogram):
        return x.bins
    return np.asarray(x, dtype=np.complex128)


def _check_shapes(*arrays: NDArray[np.generic]) -> None:
    shape = arrays[0].shape
    for other in arrays[1:]:
        if other.shape != shape:
            raise ShapeMismatchError(f"Shapes differ: {shape} vs {other.shape}")


def _compress(z: ComplexArray, cfg: LossConfig) -> tuple[ComplexArray, FloatArray, FloatArray]:
    """Return (compressed spectrum, compressed magnitude, floored-magnitude factor)."""
    mag = np.abs(z)
    factor = np.maximum(mag, cfg.epsilon) ** (cfg.c - 1.0)
    return factor * z, factor * mag, factor


def _reduce_scale(shape: tuple[int, ...], cfg: LossConfig) -> float:
    if cfg.reduction == "mean":
        return 1.0 / max(int(np.prod(shape)), 1)
    return 1.0


def _loss_and_grad(
    s: ComplexArray,
    x: ComplexArray,
    g: FloatArray,
    cfg: LossConfig,
    with_grad: bool,
) -> LossReport:
    s_hat = g * x
    cs, ms, _ = _compress(s, cfg)
    cs_hat, ms_hat, factor = _compress(s_hat, cfg)
    scale = _reduce_scale(s.shape, cfg)

    complex_err = cs - cs_hat
    magnitude_err = ms - ms_hat
    complex_term = float(np.sum(np.abs(complex_err) ** 2)) * scale
    magnitude_term = float(np.sum(magnitude_err**2)) * scale
    value = cfg.alpha * complex_term + (1.0 - cfg.alpha) * magnitude_term

    grad: FloatArray | None = None
    if with_grad:
        # d C(G X)/dG = kappa * f * X and d|C(G X)|/dG = kappa * f * sign(G) |X|,
        # with f = max(|G X|, eps)^(c-1) and kappa = c above the floor, 1 below it.
        kappa = np.where(np.abs(s_hat) >= cfg.epsilon, cfg.c, 1.0)
        d_complex = kappa * factor * x
        d_magnitude = kappa * factor * np.sign(g) * np.abs(x)
        grad = -2.0 * scale * (
            cfg.alpha * np.real(np.conj(complex_err) * d_complex)
            + (1.0 - cfg.alpha) * magnitude_err * d_magnitude
        )
    return LossReport(value, complex_term, magnitude_term, grad)


def compressed_loss(
    S: Spectrogram | ArrayLike, S_hat: Spectrogram | ArrayLike, cfg: LossConfig | None = None
) -> LossReport:
    """Evaluate the compressed loss between target and estimate spectra.

    Raises:
        ShapeMismatchError: If the spectra differ in shape.
    """
    cfg = cfg or LossConfig()
    s = _as_complex(S)
    s_hat = _as_complex(S_hat)
    _check_shapes(s, s_hat)
    return _loss_and_grad(s, s_hat, np.ones(s.shape), cfg, with_grad=False)


def _prepare(
    S: Spectrogram | ArrayLike,
    X: Spectrogram | ArrayLike,
    G: ArrayLike,
    normalized: bool,
    sigma_s: float | None,
) -> tuple[ComplexArray, ComplexArray, FloatArray]:
    s = _as_complex(S)
    x = _as_complex(X)
    g = np.asarray(G, dtype=np.float64)
    _check_shapes(s, x, g)
    if normalized:
        if sigma_s is None or not sigma_s > 0:
            raise NonPositiveSigmaError(f"sigma_s must be positive, got {sigma_s}")
        s = s / sigma_s
        x = x / sigma_s
    return s, x, g


def normalized_loss(
    S: Spectrogram | ArrayLike,
    X: Spectrogram | ArrayLike,
    G: ArrayLike,
    sigma_s: float,
    cfg: LossConfig | None = None,
    with_grad: bool = False,
) -> LossReport:
    """Compressed loss of ``S / sigma_s`` against ``G * (X / sigma_s)``.

    Only the loss inputs are normalized; G (and the features that produced
    it) are used as given.

    Raises:
        NonPositiveSigmaError: If ``sigma_s <= 0``.
        ShapeMismatchError: If S, X and G differ in shape.
    """
    cfg = cfg or LossConfig()
    s, x, g = _prepare(S, X, G, True, sigma_s)
    return _loss_and_grad(s, x, g, cfg, with_grad)


def gain_loss(
    S: Spectrogram | ArrayLike,
    X: Spectrogram | ArrayLike,
    G: ArrayLike,
    cfg: LossConfig | None = None,
    normalized: bool = False,
    sigma_s: float | None = None,
) -> LossReport:
    """Loss and gradient of ``S`` against ``G * X`` in either loss mode."""
    cfg = cfg or LossConfig()
    s, x, g = _prepare(S, X, G, normalized, sigma_s)
    return _loss_and_grad(s, x, g, cfg, with_grad=True)


def loss_grad_gain(
    S: Spectrogram | ArrayLike,
    X: Spectrogram | ArrayLike,
    G: ArrayLike,
    cfg: LossConfig | None = None,
    normalized: bool = False,
    sigma_s: float | None = None,
) -> FloatArray:
    """Analytic dL/dG for the standard or normalized loss with S_hat = G * X.

    Raises:
        NonPositiveSigmaError: If ``normalized`` and ``sigma_s`` is not positive.
        ShapeMismatchError: If S, X and G differ in shape.
    """
    grad = gain_loss(S, X, G, cfg, normalized, sigma_s).grad_gain
    assert grad is not None
    return grad


def batch_loss(reports: Sequence[LossReport]) -> float:
    """Mean of per-utterance losses."""
    if not reports:
        return 0.0
    return float(np.mean([r.value for r in reports]))
