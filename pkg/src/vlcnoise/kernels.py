"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is used. Set ``VLCNOISE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("VLCNOISE_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"

avar_direct = _impl.avar_direct
avar_sliding = _impl.avar_sliding
autocorr_numerators = _impl.autocorr_numerators
causal_convolve = _impl.causal_convolve

__all__ = [
    "BACKEND",
    "avar_direct",
    "avar_sliding",
    "autocorr_numerators",
    "causal_convolve",
]
