"""Random spectral-shaping biquads.

    H(z) = (1 + r1 z^-1 + r2 z^-2) / (1 + r3 z^-1 + r4 z^-2)

With every coefficient drawn from U[-3/8, 3/8] the denominator satisfies
|r4| < 1 and |r3| < 1 + r4, so all sampled filters are stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.signal import freqz, lfilter

from augnorm.core.dsp import Waveform
from augnorm.core.errors import UnstableFilterError

DEFAULT_BOUND = 0.375


@dataclass(frozen=True, slots=True)
class BiquadCoeffs:
    """The four free coefficients of the shaping filter."""

    r1: float = 0.0
    r2: float = 0.0
    r3: float = 0.0
    r4: float = 0.0

    def __post_init__(self) -> None:
        for name in ("r1", "r2", "r3", "r4"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"Biquad coefficient {name} must be finite: {value}")

    @classmethod
    def identity(cls) -> BiquadCoeffs:
        return cls()

    @property
    def numerator(self) -> tuple[float, float, float]:
        return (1.0, self.r1, self.r2)

    @property
    def denominator(self) -> tuple[float, float, float]:
        return (1.0, self.r3, self.r4)

    def poles(self) -> NDArray[np.complex128]:
        """Roots of z^2 + r3 z + r4."""
        return np.roots(self.denominator).astype(np.complex128)

    @property
    def is_stable(self) -> bool:
        poles = self.poles()
        return bool(poles.size == 0 or np.max(np.abs(poles)) < 1.0)

    def within(self, bound: float = DEFAULT_BOUND) -> bool:
        return all(abs(v) <= bound for v in (self.r1, self.r2, self.r3, self.r4))

    def frequency_response(self, n_points: int = 512, whole: bool = False) -> NDArray[np.complex128]:
        """H(e^{jw}) on ``n_points`` equally spaced frequencies."""
        _, h = freqz(self.numerator, self.denominator, worN=n_points, whole=whole)
        return np.asarray(h, dtype=np.complex128)

    def to_dict(self) -> dict[str, float]:
        return {"r1": self.r1, "r2": self.r2, "r3": self.r3, "r4": self.r4}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BiquadCoeffs:
        return cls(
            r1=float(data["r1"]), r2=float(data["r2"]), r3=float(data["r3"]), r4=float(data["r4"])
        )


def sample_biquad(rng: np.random.Generator, bound: float = DEFAULT_BOUND) -> BiquadCoeffs:
    """Draw four i.i.d. coefficients from U[-bound, bound].

    Args:
        rng: Seeded generator; consumes exactly four uniform draws.
        bound: Half-width of the uniform range (3/8 keeps every draw stable).

    Returns:
        Sampled coefficients.
    """
    r = rng.uniform(-bound, bound, size=4)
    return BiquadCoeffs(float(r[0]), float(r[1]), float(r[2]), float(r[3]))


def apply_biquad(w: Waveform, c: BiquadCoeffs) -> Waveform:
    """Direct-form IIR filtering with zero initial state.

    Raises:
        UnstableFilterError: If a pole lies on or outside the unit circle.
    """
    if not c.is_stable:
        raise UnstableFilterError(
            f"Biquad {c.to_dict()} has poles {np.abs(c.poles())} outside the unit circle"
        )
    y = lfilter(c.numerator, c.denominator, w.samples)
    return Waveform(np.asarray(y, dtype=np.float64), w.sample_rate_hz)
