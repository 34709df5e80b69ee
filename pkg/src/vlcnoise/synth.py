"""Seeded white noise and 1/f^alpha colored noise via the fractional-integration filter.

The filter ``1 / (1 - z^-1)^(alpha/2)`` has impulse response weights

    h[0] = 1,  h[j] = (alpha/2 + j - 1) * h[j-1] / j

and colored noise is the truncated causal convolution
``eta[i] = sum_{j=0..i} h[j] * w[i-j]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DataError
from .signals import TimeSeries

#: lengths above this use FFT convolution instead of the direct sum
DIRECT_MAX_LENGTH = 2 ** 13


def wiener_weights(alpha: float, m: int) -> np.ndarray:
    """First ``m`` impulse-response weights of the fractional-integration filter."""
    if not 0.0 <= alpha <= 2.0:
        raise DataError(f"alpha must lie in [0, 2], got {alpha}")
    if m < 1:
        raise DataError("m must be at least 1")
    h = np.empty(m)
    h[0] = 1.0
    half = 0.5 * alpha
    for j in range(1, m):
        h[j] = (half + j - 1) * h[j - 1] / j
    return h


def gaussian_white(length: int, sigma: float = 1.0, seed: int = 0, sample_rate_hz: float = 1.0) -> TimeSeries:
    """i.i.d. zero-mean Gaussian samples with standard deviation ``sigma``.

    The stream is ``sigma * z`` where ``z`` comes from
    ``numpy.random.Generator(PCG64(seed)).standard_normal`` (ziggurat method),
    so changing ``sigma`` rescales the same draw exactly.
    """
    if length < 1:
        raise DataError("length must be at least 1")
    z = np.random.Generator(np.random.PCG64(seed)).standard_normal(int(length))
    return TimeSeries(sigma * z, sample_rate_hz)


def _fft_causal_convolve(h: np.ndarray, w: np.ndarray) -> np.ndarray:
    m = w.size
    nfft = 1 << int(2 * m - 1).bit_length()
    spec = np.fft.rfft(h, nfft) * np.fft.rfft(w, nfft)
    return np.fft.irfft(spec, nfft)[:m]


def colored_noise(white: np.ndarray, alpha: float, method: str = "auto") -> np.ndarray:
    """Color a white sequence with the fractional-integration filter.

    ``method`` is ``"direct"`` (O(M^2) sum), ``"fft"`` or ``"auto"``. The
    endpoints are handled exactly: alpha=0 returns a copy of the input and
    alpha=2 a running sum.
    """
    w = np.ascontiguousarray(white, dtype=np.float64)
    if not 0.0 <= alpha <= 2.0:
        raise DataError(f"alpha must lie in [0, 2], got {alpha}")
    if alpha == 0.0:
        return w.copy()
    if alpha == 2.0:
        return np.cumsum(w)
    h = wiener_weights(alpha, w.size)
    if method == "auto":
        method = "direct" if w.size <= DIRECT_MAX_LENGTH else "fft"
    if method == "direct":
        return kernels.causal_convolve(h, w)
    if method == "fft":
        return _fft_causal_convolve(h, w)
    raise DataError(f"unknown method {method!r}")


@dataclass(frozen=True)
class NoiseComponent:
    alpha: float
    sigma: float
    weight: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 2.0:
            raise DataError(f"alpha must lie in [0, 2], got {self.alpha}")
        if not self.sigma > 0:
            raise DataError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def parse(cls, text: str) -> "NoiseComponent":
        """Parse ``"alpha:sigma[:weight]"``."""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise DataError(f"component must be alpha:sigma[:weight], got {text!r}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"component must be numeric alpha:sigma[:weight], got {text!r}") from None
        return cls(*vals)


@dataclass(frozen=True)
class NoiseRecipe:
    """A sum of independently seeded colored-noise components plus a DC mean.

    Component ``i`` draws its driving noise from seed ``seed + i``, so adding
    a component leaves the earlier ones untouched.
    """

    components: tuple
    length: int
    seed: int = 0
    mean: float = 0.0
    sample_rate_hz: float = 1.0
    discard_prefix: int = 0

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, NoiseComponent) else NoiseComponent(**c) for c in self.components
        )
        if not comps:
            raise DataError("recipe needs at least one component")
        if int(self.length) != self.length or self.length < 1:
            raise DataError("length must be a positive integer")
        if self.discard_prefix < 0:
            raise DataError("discard_prefix must be non-negative")
        object.__setattr__(self, "components", comps)

    def to_dict(self):
        return {
            "components": [
                {"alpha": c.alpha, "sigma": c.sigma, "weight": c.weight} for c in self.components
            ],
            "length": self.length,
            "seed": self.seed,
            "mean": self.mean,
            "sample_rate_hz": self.sample_rate_hz,
            "discard_prefix": self.discard_prefix,
        }


def synthesize(recipe: NoiseRecipe, method: str = "auto", label: Optional[str] = None) -> TimeSeries:
    total = recipe.length + recipe.discard_prefix
    out = np.zeros(recipe.length)
    for i, comp in enumerate(recipe.components):
        w = gaussian_white(total, comp.sigma, recipe.seed + i).samples
        eta = colored_noise(w, comp.alpha, method)[recipe.discard_prefix:]
        out += comp.weight * eta
    return TimeSeries(out + recipe.mean, recipe.sample_rate_hz, label)
