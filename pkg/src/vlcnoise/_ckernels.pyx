# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Mirrors ``_pykernels`` function for function."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def avar_direct(const double[::1] x, Py_ssize_t n):
    """Overlapping Allan variance with every cluster mean summed afresh.

    Operation order is the literal double loop, so results are bit-identical
    to a naive implementation.
    """
    cdef Py_ssize_t N = x.shape[0]
    cdef Py_ssize_t K = N - 2 * n + 1
    cdef Py_ssize_t k, i
    cdef double s1, s2, d, acc = 0.0
    for k in range(K):
        s1 = 0.0
        for i in range(k, k + n):
            s1 += x[i]
        s2 = 0.0
        for i in range(k + n, k + 2 * n):
            s2 += x[i]
        d = s2 / n - s1 / n
        acc += d * d
    return acc / (2.0 * K)


def avar_sliding(const double[::1] x, Py_ssize_t n):
    """Overlapping Allan variance with compensated running window sums. O(N)."""
    cdef Py_ssize_t N = x.shape[0]
    cdef Py_ssize_t K = N - 2 * n + 1
    cdef Py_ssize_t W = N - n + 1
    cdef Py_ssize_t k, i
    cdef double[::1] sums = np.empty(W, dtype=np.float64)
    cdef double s = 0.0, c = 0.0, t, v, d, acc = 0.0, cacc = 0.0
    for i in range(n):
        v = x[i]
        t = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    sums[0] = s + c
    for k in range(1, W):
        # add x[k + n - 1], drop x[k - 1]; Neumaier compensation on both
        v = x[k + n - 1]
        t = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        v = -x[k - 1]
        t = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        sums[k] = s + c
    for k in range(K):
        d = (sums[k + n] - sums[k]) / n
        v = d * d
        t = acc + v
        if acc >= v:
            cacc += (acc - t) + v
        else:
            cacc += (v - t) + acc
        acc = t
    return (acc + cacc) / (2.0 * K)


def autocorr_numerators(const double[::1] x, Py_ssize_t max_lag):
    """``out[k-1] = sum_j x[j] * x[j-k]`` for ``k = 1..max_lag``.

    Loops are interchanged so the inner loop updates independent lags; each
    lag still accumulates in increasing ``j``.
    """
    cdef Py_ssize_t N = x.shape[0]
    cdef Py_ssize_t k, j, kmax
    cdef double xj
    out = np.zeros(max_lag, dtype=np.float64)
    cdef double[::1] o = out
    for j in range(1, N):
        xj = x[j]
        kmax = j if j < max_lag else max_lag
        for k in range(kmax):
            o[k] += xj * x[j - k - 1]
    return out


def causal_convolve(const double[::1] h, const double[::1] w):
    """``out[i] = sum_{j=0..i} h[j] * w[i-j]`` for ``i < len(w)``. O(M^2).

    Scatter form: the inner loop updates independent outputs; each output
    still accumulates in increasing ``j``.
    """
    cdef Py_ssize_t M = w.shape[0]
    cdef Py_ssize_t L = h.shape[0]
    cdef Py_ssize_t i, j, jmax
    cdef double hj
    out = np.zeros(M, dtype=np.float64)
    cdef double[::1] o = out
    jmax = L if L < M else M
    for j in range(jmax):
        hj = h[j]
        for i in range(j, M):
            o[i] += hj * w[i - j]
    return out
