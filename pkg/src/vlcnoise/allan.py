"""Overlapping Allan variance and white / flicker / random-walk coefficient readout."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DataError
from .signals import TimeSeries

#: cluster sizes up to this use the literal per-cluster summation
DIRECT_CLUSTER_MAX = 32

WHITE_SLOPE = -0.5
FLICKER_SLOPE = 0.0
RANDOM_WALK_SLOPE = 0.5
FLICKER_FACTOR = math.sqrt(math.pi / (2.0 * math.log(2.0)))


@dataclass(frozen=True, eq=False)
class AvarCurve:
    cluster_sizes: np.ndarray
    taus: np.ndarray
    avar: np.ndarray
    adev: np.ndarray
    n_samples: int
    sample_rate_hz: float

    def __len__(self):
        return self.cluster_sizes.size


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def allan_variance(ts: TimeSeries, cluster_sizes: Sequence[int]) -> AvarCurve:
    """Fully overlapping Allan variance for each cluster size ``n``.

    For each ``n`` the adjacent cluster means ``mean(x[k:k+n])`` and
    ``mean(x[k+n:k+2n])`` are formed for every start ``k`` (stride one) and

        avar(n) = sum_k (mean2 - mean1)**2 / (2 (N - 2n + 1)).

    ``tau = n / sample_rate_hz``. Cluster sizes up to ``DIRECT_CLUSTER_MAX``
    sum each cluster afresh; larger ones use compensated running sums.
    """
    x = np.ascontiguousarray(ts.samples, dtype=np.float64)
    N = x.size
    if N < 4:
        raise DataError(f"need at least 4 samples, got {N}")
    if not np.all(np.isfinite(x)):
        raise DataError("samples contain NaN or Inf")
    sizes = [int(n) for n in cluster_sizes]
    if not sizes:
        raise DataError("no cluster sizes given")
    bad = [n for n in sizes if n < 1 or 2 * n >= N]
    if bad:
        raise DataError(f"cluster sizes {bad} violate 1 <= n < N/2 (N={N})")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DataError("cluster sizes must be strictly increasing")
    avar = np.empty(len(sizes))
    for i, n in enumerate(sizes):
        if n <= DIRECT_CLUSTER_MAX:
            avar[i] = kernels.avar_direct(x, n)
        else:
            avar[i] = kernels.avar_sliding(x, n)
    ns = np.asarray(sizes)
    return AvarCurve(
        cluster_sizes=_readonly(ns, np.int64),
        taus=_readonly(ns / ts.sample_rate_hz, np.float64),
        avar=_readonly(avar, np.float64),
        adev=_readonly(np.sqrt(avar), np.float64),
        n_samples=N,
        sample_rate_hz=ts.sample_rate_hz,
    )


def default_cluster_grid(n_samples: int, points_per_decade: int = 10) -> np.ndarray:
    """Log-spaced unique cluster sizes from 1 to ``n_samples // 2 - 1``."""
    if n_samples < 8:
        raise DataError("need at least 8 samples for a cluster grid")
    points_per_decade = max(1, int(points_per_decade))
    n_max = n_samples // 2 - 1
    decades = math.log10(n_max)
    count = int(math.ceil(decades * points_per_decade)) + 1
    grid = np.unique(np.floor(np.logspace(0.0, decades, count)).astype(np.int64))
    grid = grid[(grid >= 1) & (grid <= n_max)]
    if grid[-1] != n_max:
        grid = np.append(grid, n_max)
    return grid


# -- coefficient extraction ------------------------------------------------


@dataclass(frozen=True)
class SegmentFit:
    """Least-squares line through ``(log10 tau, log10 adev)`` over a window."""

    slope: float
    intercept: float
    residual: float
    tau_min: float
    tau_max: float
    n_points: int

    @property
    def tau_mid(self) -> float:
        return math.sqrt(self.tau_min * self.tau_max)


@dataclass(frozen=True)
class CoefficientFit:
    slope: float
    tau_window: tuple
    residual: float
    readout_tau: float
    constrained_intercept: float

    def to_dict(self):
        return {
            "slope": self.slope,
            "tau_window": list(self.tau_window),
            "residual": self.residual,
            "readout_tau": self.readout_tau,
            "constrained_intercept": self.constrained_intercept,
        }


@dataclass(frozen=True)
class NoiseCoefficients:
    white_n: Optional[float] = None
    flicker_b: Optional[float] = None
    random_walk_k: Optional[float] = None
    fit_report: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "white_n": self.white_n,
            "flicker_b": self.flicker_b,
            "random_walk_k": self.random_walk_k,
            "fit_report": {k: v.to_dict() for k, v in self.fit_report.items()},
        }


def fit_slope(curve: AvarCurve, tau_min: float, tau_max: float) -> SegmentFit:
    """Fit ``log10 adev`` against ``log10 tau`` for ``tau_min <= tau <= tau_max``."""
    mask = (curve.taus >= tau_min) & (curve.taus <= tau_max) & (curve.adev > 0)
    if mask.sum() < 2:
        raise DataError(f"fewer than two points in tau window [{tau_min}, {tau_max}]")
    lx = np.log10(curve.taus[mask])
    ly = np.log10(curve.adev[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return SegmentFit(
        float(slope),
        float(intercept),
        float(np.sqrt(np.mean(resid ** 2))),
        float(curve.taus[mask][0]),
        float(curve.taus[mask][-1]),
        int(mask.sum()),
    )


def central_decades(curve: AvarCurve, decades: float = 3.0) -> tuple[float, float]:
    """Tau window of ``decades`` width centred (in log) on the curve's span."""
    lo = math.log10(curve.taus[0])
    hi = math.log10(curve.taus[-1])
    mid = 0.5 * (lo + hi)
    half = 0.5 * min(decades, hi - lo)
    return 10 ** (mid - half), 10 ** (mid + half)


def _usable(curve: AvarCurve, min_clusters: int) -> np.ndarray:
    return (curve.cluster_sizes * min_clusters <= curve.n_samples) & (curve.adev > 0)


def _window_fits(lx, ly, taus, width):
    fits = []
    for i in range(lx.size):
        if lx[-1] - lx[i] < width - 1e-9:
            break
        j = np.searchsorted(lx, lx[i] + width + 1e-9, side="right")
        if j - i < 3:
            continue
        seg_x, seg_y = lx[i:j], ly[i:j]
        slope, intercept = np.polyfit(seg_x, seg_y, 1)
        r = seg_y - (slope * seg_x + intercept)
        fits.append((i, j, SegmentFit(
            float(slope), float(intercept), float(np.sqrt(np.mean(r ** 2))),
            float(taus[i]), float(taus[j - 1]), int(j - i),
        )))
    return fits


def _runs(fits, target, tolerance, max_residual):
    """Maximal runs of consecutive straight windows with slope near ``target``."""
    runs, cur = [], []
    for pos, f in enumerate(fits):
        if abs(f[2].slope - target) <= tolerance and f[2].residual <= max_residual:
            if cur and cur[-1][0] != pos - 1:
                runs.append(cur)
                cur = []
            cur.append((pos, f))
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return [[f for _, f in run] for run in runs]


def extract_coefficients(
    curve: AvarCurve,
    tolerance: float = 0.15,
    window_decades: float = 1.0,
    min_clusters: int = 10,
    max_residual: float = 0.03,
) -> NoiseCoefficients:
    """Identify noise components from log-log slopes of the Allan deviation.

    One-decade windows are slid along the curve and fitted by least squares.
    A window whose slope is within ``tolerance`` of -1/2, 0 or +1/2 counts as
    white, flicker or random-walk respectively, provided the window is straight
    (RMS residual at most ``max_residual`` decades; this rejects the curved
    bottom of a white-to-random-walk crossover, whose mid-window slope is
    near zero). Consecutive qualifying windows form a segment. White noise is read from the shortest-tau segment,
    random walk from the longest-tau one and flicker from the segment holding
    the flattest window. Each readout uses a line of nominal slope through
    the segment's points, with the offset averaged using weights
    ``sqrt(N / n)`` (``N / n`` being the number of clusters behind a point):

    * ``N = adev(tau=1)``
    * ``B = adev(tau_mid) * sqrt(pi / (2 ln 2))``, ``tau_mid`` the segment's log-midpoint
    * ``K = adev(tau=3)``

    Points averaged over fewer than ``min_clusters`` clusters are ignored.
    """
    keep = _usable(curve, min_clusters)
    taus = curve.taus[keep]
    lx = np.log10(taus)
    ly = np.log10(curve.adev[keep])
    weights = np.sqrt(curve.n_samples / curve.cluster_sizes[keep])
    if lx.size < 3 or lx[-1] - lx[0] < window_decades - 1e-9:
        raise DataError(
            f"curve too short for coefficient extraction: {lx.size} usable points "
            f"spanning {lx[-1] - lx[0] if lx.size else 0:.2f} decades"
        )
    fits = _window_fits(lx, ly, taus, window_decades)
    if not fits:
        raise DataError("too few points per decade for a one-decade window fit")

    def readout(run, target, tau_read=None):
        i = min(f[0] for f in run)
        j = max(f[1] for f in run)
        c = float(np.average(ly[i:j] - target * lx[i:j], weights=weights[i:j]))
        seg = fit_slope_arrays(lx[i:j], ly[i:j])
        if tau_read is None:
            tau_read = math.sqrt(taus[i] * taus[j - 1])
        value = 10 ** (c + target * math.log10(tau_read))
        fit = CoefficientFit(seg[0], (float(taus[i]), float(taus[j - 1])), seg[1], tau_read, c)
        return value, fit

    report = {}
    white = flicker = rw = None
    runs = _runs(fits, WHITE_SLOPE, tolerance, max_residual)
    if runs:
        white, report["white_n"] = readout(runs[0], WHITE_SLOPE, 1.0)
    runs = _runs(fits, FLICKER_SLOPE, tolerance, max_residual)
    if runs:
        best = min(runs, key=lambda r: min(abs(f[2].slope) for f in r))
        value, report["flicker_b"] = readout(best, FLICKER_SLOPE)
        flicker = value * FLICKER_FACTOR
    runs = _runs(fits, RANDOM_WALK_SLOPE, tolerance, max_residual)
    if runs:
        rw, report["random_walk_k"] = readout(runs[-1], RANDOM_WALK_SLOPE, 3.0)
    return NoiseCoefficients(white, flicker, rw, report)


def fit_slope_arrays(lx, ly):
    """``(slope, rms residual)`` of a least-squares line through log-log points."""
    slope, intercept = np.polyfit(lx, ly, 1)
    r = ly - (slope * lx + intercept)
    return float(slope), float(np.sqrt(np.mean(r ** 2)))
