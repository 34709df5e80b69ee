"""numpy implementations of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def avar_direct(x, n):
    # window sums accumulated left to right, one term per pass, so every
    # cluster mean has the same rounding as a plain scalar loop
    x = np.ascontiguousarray(x, dtype=np.float64)
    N = x.size
    K = N - 2 * n + 1
    W = N - n + 1
    sums = np.zeros(W)
    for i in range(n):
        sums += x[i:i + W]
    means = sums / n
    d = means[n:n + K] - means[:K]
    return float(np.cumsum(d * d)[-1] / (2.0 * K))


def avar_sliding(x, n):
    x = np.ascontiguousarray(x, dtype=np.float64)
    N = x.size
    K = N - 2 * n + 1
    # centring keeps the prefix sums small; the offset cancels in differences
    xc = x - x.mean()
    c = np.concatenate(([0.0], np.cumsum(xc)))
    sums = c[n:] - c[:-n]
    d = (sums[n:n + K] - sums[:K]) / n
    return float(np.sum(d * d) / (2.0 * K))


def autocorr_numerators(x, max_lag):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return np.array([np.dot(x[k:], x[:-k]) for k in range(1, max_lag + 1)])


def causal_convolve(h, w):
    w = np.ascontiguousarray(w, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    return np.convolve(w, h)[: w.size]
