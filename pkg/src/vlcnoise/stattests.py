"""Sample autocorrelation, the Ljung-Box portmanteau test and chi-square quantiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError, NumericalError
from .signals import TimeSeries

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise DataError("a must be positive")
    if x < 0:
        raise DataError("x must be non-negative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_contfrac(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper counterpart ``1 - P(a, x)``, computed without cancellation."""
    if a <= 0:
        raise DataError("a must be positive")
    if x < 0:
        raise DataError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_cdf(x: float, k: int) -> float:
    if x <= 0:
        return 0.0
    return regularized_gamma_p(0.5 * k, 0.5 * x)


def chi2_quantile(p: float, k: int, rtol: float = 1e-12) -> float:
    """Inverse chi-square CDF with ``k`` degrees of freedom.

    Safeguarded Newton iteration on the regularized incomplete gamma function:
    Newton steps that leave the current bracket fall back to bisection. In the
    upper tail the residual is taken on ``Q = 1 - P`` to keep relative
    precision.
    """
    if not 0.0 < p < 1.0:
        raise DataError(f"p must lie in (0, 1), got {p}")
    if int(k) != k or k < 1:
        raise DataError(f"degrees of freedom must be a positive integer, got {k}")
    a = 0.5 * k
    upper = p > 0.5
    q = 1.0 - p

    def resid(x):
        if upper:
            return q - regularized_gamma_q(a, 0.5 * x)
        return regularized_gamma_p(a, 0.5 * x) - p

    def pdf(x):
        return math.exp((a - 1.0) * math.log(0.5 * x) - 0.5 * x - math.lgamma(a)) * 0.5

    lo, hi = 0.0, max(float(k), 1.0)
    while resid(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise NumericalError(f"chi2_quantile bracket search failed (p={p}, k={k})")
    x = 0.5 * (lo + hi)
    for it in range(500):
        f = resid(x)
        if f == 0.0:
            return x
        if f < 0:
            lo = x
        else:
            hi = x
        dens = pdf(x)
        step_ok = False
        if dens > 0 and math.isfinite(dens):
            xn = x - f / dens
            if lo < xn < hi:
                step_ok = True
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= rtol * abs(xn) or hi - lo <= rtol * hi:
            return xn
        x = xn
    raise NumericalError(
        f"chi2_quantile did not converge (p={p}, k={k}, bracket=[{lo!r}, {hi!r}], last x={x!r})"
    )


def _as_array(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.samples
    return np.asarray(ts, dtype=np.float64).reshape(-1)


def autocorrelation(ts, max_lag: int, demean: bool = False) -> np.ndarray:
    """Sample autocorrelation at lags ``1..max_lag``.

    ``r[k-1] = sum_{j>k} x_j x_{j-k} / sum_j x_j**2``. The series is used as
    given unless ``demean`` is set.
    """
    x = _as_array(ts)
    if max_lag < 1 or max_lag >= x.size:
        raise DataError(f"max_lag must be in [1, {x.size - 1}], got {max_lag}")
    if demean:
        x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise DataError("autocorrelation undefined: sum of squares is zero")
    return kernels.autocorr_numerators(np.ascontiguousarray(x), int(max_lag)) / denom


@dataclass(frozen=True)
class LjungBoxResult:
    """Q statistics and verdicts for lags ``1..M`` (element ``m-1`` is lag ``m``)."""

    q_stats: np.ndarray
    thresholds: np.ndarray
    alpha: float
    reject: np.ndarray
    n_samples: int

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, self.q_stats.size + 1)

    def rows(self):
        for m, q, t, r in zip(self.lags, self.q_stats, self.thresholds, self.reject):
            yield int(m), float(q), float(t), bool(r)


_threshold_cache: dict[tuple[float, int], np.ndarray] = {}


def chi2_thresholds(alpha: float, max_lag: int) -> np.ndarray:
    key = (float(alpha), int(max_lag))
    if key not in _threshold_cache:
        t = np.array([chi2_quantile(1.0 - alpha, m) for m in range(1, max_lag + 1)])
        t.setflags(write=False)
        _threshold_cache[key] = t
    return _threshold_cache[key]


def ljung_box(ts, max_lag: int, alpha: float = 0.05, demean: bool = True) -> LjungBoxResult:
    """Ljung-Box Q test against the white-noise null at every lag up to ``max_lag``.

    ``Q_m = N (N + 2) sum_{k<=m} r_k**2 / (N - k)``; the null is rejected at
    lag ``m`` when ``Q_m`` exceeds the ``1 - alpha`` chi-square quantile with
    ``m`` degrees of freedom. ``demean=False`` computes the autocorrelation on
    the raw samples.
    """
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    x = _as_array(ts)
    n = x.size
    r = autocorrelation(x, max_lag, demean=demean)
    k = np.arange(1, max_lag + 1)
    q = n * (n + 2.0) * np.cumsum(r * r / (n - k))
    thr = chi2_thresholds(alpha, max_lag)
    return LjungBoxResult(q, thr.copy(), float(alpha), q > thr, int(n))
