"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-``repeat`` wall time per backend and the speedup.
"""
import argparse
import timeit

import numpy as np

from vlcnoise import _pykernels

try:
    from vlcnoise import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    x = np.cumsum(rng.standard_normal(1_000_000))
    w = rng.standard_normal(4096)
    h = np.linspace(1.0, 0.01, 4096)
    short = rng.standard_normal(2000)
    return [
        ("avar_direct n=8, N=1e6", "avar_direct", (x, 8)),
        ("avar_direct n=32, N=1e6", "avar_direct", (x, 32)),
        ("avar_sliding n=1000, N=1e6", "avar_sliding", (x, 1000)),
        ("autocorr 100 lags, N=2000", "autocorr_numerators", (short, 100)),
        ("autocorr 100 lags, N=1e6", "autocorr_numerators", (x, 100)),
        ("causal_convolve M=4096", "causal_convolve", (h, w)),
    ]


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'case':<30} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for label, name, call_args in cases():
        py = best(getattr(_pykernels, name), call_args, args.repeat)
        if _ckernels is None:
            print(f"{label:<30} {1e3 * py:12.2f} {'-':>12} {'-':>8}")
            continue
        cy = best(getattr(_ckernels, name), call_args, args.repeat)
        print(f"{label:<30} {1e3 * py:12.2f} {1e3 * cy:12.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
