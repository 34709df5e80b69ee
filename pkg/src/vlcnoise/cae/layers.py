"""Strided 1D convolution and its transpose, with analytic gradients.

Arrays are ``(batch, channels, length)`` float64. A convolution weight has
shape ``(out_channels, in_channels, kernel)``; a transposed-convolution weight
has shape ``(in_channels, out_channels, kernel)`` so that the same array used
in both operators gives a pair of mutually adjoint linear maps.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DataError


def conv_output_length(length: int, kernel: int, stride: int, padding: int) -> int:
    return (length + 2 * padding - kernel) // stride + 1


def _check_input(x, weight, in_axis, name):
    if x.ndim != 3:
        raise DataError(f"{name}: expected (batch, channels, length) input, got shape {x.shape}")
    if x.shape[1] != weight.shape[in_axis]:
        raise DataError(
            f"{name}: input has {x.shape[1]} channels, layer expects {weight.shape[in_axis]}"
        )


def _windows(xp, kernel, stride, n_out):
    return sliding_window_view(xp, kernel, axis=2)[:, :, ::stride][:, :, :n_out]


def conv1d_forward(x, weight, bias, stride=1, padding=0, name="conv1d"):
    """Cross-correlation ``y[b,o,t] = sum_{c,j} w[o,c,j] * xpad[b,c,t*s+j] + bias[o]``.

    Returns the output and a cache for :func:`conv1d_backward`.
    """
    _check_input(x, weight, 1, name)
    k = weight.shape[2]
    length = x.shape[2]
    n_out = conv_output_length(length, k, stride, padding)
    if n_out < 1:
        raise DataError(f"{name}: input length {length} too short for kernel {k}")
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding))) if padding else x
    cols = _windows(xp, k, stride, n_out)
    y = np.einsum("bctj,ocj->bot", cols, weight, optimize=True)
    if bias is not None:
        y += bias[None, :, None]
    return y, (cols, xp.shape, length)


def conv1d_backward(dy, weight, cache, stride=1, padding=0):
    """Gradients ``(dx, dweight, dbias)`` of :func:`conv1d_forward`."""
    cols, xp_shape, length = cache
    k = weight.shape[2]
    n_out = dy.shape[2]
    dw = np.einsum("bot,bctj->ocj", dy, cols, optimize=True)
    db = dy.sum(axis=(0, 2))
    dcols = np.einsum("bot,ocj->bctj", dy, weight, optimize=True)
    dxp = np.zeros(xp_shape)
    span = stride * (n_out - 1) + 1
    for j in range(k):
        dxp[:, :, j:j + span:stride] += dcols[..., j]
    dx = dxp[:, :, padding:padding + length]
    return dx, dw, db


def conv1d_transpose_forward(z, weight, bias, stride=1, padding=0, output_length=None,
                             name="conv1d_transpose"):
    """Transpose of :func:`conv1d_forward`: stride-``s`` scatter-add of kernel copies.

    The full scatter has length ``(L - 1) * s + k``; ``padding`` samples are
    cropped on the left and the result is cut (or zero-extended) to
    ``output_length``, which defaults to ``(L - 1) * s + k - 2 * padding``.
    """
    _check_input(z, weight, 0, name)
    batch, _, n_in = z.shape
    k = weight.shape[2]
    full_len = (n_in - 1) * stride + k
    if output_length is None:
        output_length = full_len - 2 * padding
    if output_length < 1:
        raise DataError(f"{name}: non-positive output length {output_length}")
    full = np.zeros((batch, weight.shape[1], max(full_len, padding + output_length)))
    span = stride * (n_in - 1) + 1
    contrib = np.einsum("bct,cdj->bdjt", z, weight, optimize=True)
    for j in range(k):
        full[:, :, j:j + span:stride] += contrib[:, :, j]
    y = full[:, :, padding:padding + output_length].copy()
    if bias is not None:
        y += bias[None, :, None]
    return y, (z, full.shape)


def conv1d_transpose_backward(dy, weight, cache, stride=1, padding=0):
    """Gradients ``(dz, dweight, dbias)`` of :func:`conv1d_transpose_forward`."""
    z, full_shape = cache
    n_in = z.shape[2]
    k = weight.shape[2]
    dfull = np.zeros(full_shape)
    dfull[:, :, padding:padding + dy.shape[2]] = dy
    cols = _windows(dfull, k, stride, n_in)
    dz = np.einsum("bdtj,cdj->bct", cols, weight, optimize=True)
    dw = np.einsum("bct,bdtj->cdj", z, cols, optimize=True)
    db = dy.sum(axis=(0, 2))
    return dz, dw, db


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


BCE_CLAMP = 1e-7


def bce_loss(pred, target):
    """Mean binary cross-entropy; predictions are clamped to ``[1e-7, 1 - 1e-7]``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    p = np.clip(pred, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(-np.mean(target * np.log(p) + (1.0 - target) * np.log1p(-p)))


def bce_grad(pred, target):
    """d(mean BCE)/d(pred), zero where the clamp is active."""
    p = np.clip(pred, BCE_CLAMP, 1.0 - BCE_CLAMP)
    g = (p - target) / (p * (1.0 - p)) / pred.size
    inside = (pred > BCE_CLAMP) & (pred < 1.0 - BCE_CLAMP)
    return np.where(inside, g, 0.0)
