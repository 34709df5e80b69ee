"""Convolutional autoencoder: strided conv encoder, transposed-conv decoder, sigmoid output."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import DataError, NumericalError
from . import layers as L


@dataclass(frozen=True)
class ConvSpec:
    filters: int
    kernel_size: int = 3
    stride: int = 2

    def __post_init__(self):
        for name in ("filters", "kernel_size", "stride"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be positive")

    @property
    def padding(self) -> int:
        return (self.kernel_size - 1) // 2


@dataclass(frozen=True)
class CaeArchitecture:
    """Layer plan for the autoencoder.

    The encoder is a stack of padded strided convolutions. The decoder mirrors
    it in reverse with transposed convolutions that restore each encoder
    input length, and a final single-filter stride-1 transposed convolution
    with ``kernel_size // 2`` padding produces the sigmoid output at
    ``input_length``.
    """

    input_length: int
    encoder: tuple = (ConvSpec(128), ConvSpec(32))
    output_kernel_size: int = 3

    def __post_init__(self):
        enc = tuple(c if isinstance(c, ConvSpec) else ConvSpec(**c) for c in self.encoder)
        if not enc:
            raise DataError("encoder needs at least one layer")
        object.__setattr__(self, "encoder", enc)
        if self.input_length < 1:
            raise DataError("input_length must be positive")
        if self.encoder_lengths()[-1] < 1:
            raise DataError(f"input_length {self.input_length} too short for the encoder")

    @classmethod
    def from_filters(cls, input_length, filters, kernel_size=3, stride=2):
        return cls(input_length, tuple(ConvSpec(f, kernel_size, stride) for f in filters))

    def encoder_lengths(self) -> list[int]:
        lengths = [self.input_length]
        for spec in self.encoder:
            lengths.append(L.conv_output_length(lengths[-1], spec.kernel_size, spec.stride, spec.padding))
        return lengths

    def layer_plan(self) -> list[dict]:
        """Every layer with kind, channel counts, kernel, stride, padding, output length."""
        lengths = self.encoder_lengths()
        plan = []
        in_ch = 1
        for i, spec in enumerate(self.encoder):
            plan.append(dict(name=f"enc{i}", kind="conv", in_ch=in_ch, out_ch=spec.filters,
                             kernel=spec.kernel_size, stride=spec.stride, padding=spec.padding,
                             out_len=lengths[i + 1], activation="relu"))
            in_ch = spec.filters
        n = len(self.encoder)
        for i, spec in enumerate(reversed(self.encoder)):
            plan.append(dict(name=f"dec{i}", kind="tconv", in_ch=in_ch, out_ch=spec.filters,
                             kernel=spec.kernel_size, stride=spec.stride, padding=spec.padding,
                             out_len=lengths[n - 1 - i], activation="relu"))
            in_ch = spec.filters
        k = self.output_kernel_size
        plan.append(dict(name="out", kind="tconv", in_ch=in_ch, out_ch=1, kernel=k, stride=1,
                         padding=k // 2, out_len=self.input_length, activation="sigmoid"))
        return plan

    def to_dict(self):
        return {
            "input_length": self.input_length,
            "encoder": [asdict(s) for s in self.encoder],
            "output_kernel_size": self.output_kernel_size,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["input_length"]), tuple(ConvSpec(**s) for s in d["encoder"]),
                   int(d.get("output_kernel_size", 3)))


INIT_SCHEME = "he_uniform(relu layers), lecun_uniform(sigmoid output), zero bias; draws in layer order"


def _weight_shape(layer):
    if layer["kind"] == "conv":
        return (layer["out_ch"], layer["in_ch"], layer["kernel"])
    return (layer["in_ch"], layer["out_ch"], layer["kernel"])


@dataclass
class CaeModel:
    architecture: CaeArchitecture
    params: dict
    seed: int = 0
    epochs: int = 0

    @classmethod
    def initialize(cls, architecture: CaeArchitecture, seed: int = 0) -> "CaeModel":
        """Uniform fan-in initialization: ``U(-b, b)`` with ``b = sqrt(6/fan_in)`` for
        ReLU layers and ``sqrt(3/fan_in)`` for the sigmoid output; biases zero.
        ``fan_in = in_channels * kernel``.
        """
        rng = np.random.Generator(np.random.PCG64(seed))
        params = {}
        for layer in architecture.layer_plan():
            fan_in = layer["in_ch"] * layer["kernel"]
            gain = 6.0 if layer["activation"] == "relu" else 3.0
            bound = math.sqrt(gain / fan_in)
            params[layer["name"] + ".W"] = rng.uniform(-bound, bound, _weight_shape(layer))
            params[layer["name"] + ".b"] = np.zeros(layer["out_ch"])
        return cls(architecture, params, seed=seed, epochs=0)

    def param_names(self) -> list[str]:
        names = []
        for layer in self.architecture.layer_plan():
            names += [layer["name"] + ".W", layer["name"] + ".b"]
        return names

    def copy(self) -> "CaeModel":
        return CaeModel(self.architecture, {k: v.copy() for k, v in self.params.items()},
                        self.seed, self.epochs)

    def _prepare(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, None, :]
        elif x.ndim == 2:
            x = x[:, None, :]
        if x.ndim != 3 or x.shape[1] != 1:
            raise DataError(f"expected (batch, length) signals, got shape {x.shape}")
        if x.shape[2] != self.architecture.input_length:
            raise DataError(
                f"input length {x.shape[2]} does not match model input_length "
                f"{self.architecture.input_length}"
            )
        return x

    def forward(self, x, keep_cache=False):
        """Map ``(batch, length)`` signals to reconstructions of the same shape."""
        h = self._prepare(x)
        caches = []
        for idx, layer in enumerate(self.architecture.layer_plan()):
            W = self.params[layer["name"] + ".W"]
            b = self.params[layer["name"] + ".b"]
            if layer["kind"] == "conv":
                a, cache = L.conv1d_forward(h, W, b, layer["stride"], layer["padding"], layer["name"])
            else:
                a, cache = L.conv1d_transpose_forward(h, W, b, layer["stride"], layer["padding"],
                                                      layer["out_len"], layer["name"])
            h = L.relu(a) if layer["activation"] == "relu" else L.sigmoid(a)
            if not np.all(np.isfinite(h)):
                raise NumericalError(f"non-finite activations in layer {idx} ({layer['name']})")
            if keep_cache:
                caches.append((layer, cache, a, h))
        out = h[:, 0, :]
        return (out, caches) if keep_cache else out

    def loss_and_grads(self, noisy, clean):
        """Mean BCE of ``forward(noisy)`` against ``clean`` and its exact gradients."""
        noisy = np.asarray(noisy, dtype=np.float64)
        clean = np.asarray(clean, dtype=np.float64)
        if noisy.ndim == 1:
            noisy, clean = noisy[None], clean[None]
        if noisy.shape[0] == 0:
            raise DataError("empty batch")
        if noisy.shape != clean.shape:
            raise DataError(f"noisy {noisy.shape} and clean {clean.shape} batches differ in shape")
        pred, caches = self.forward(noisy, keep_cache=True)
        loss = L.bce_loss(pred, clean)
        grads = {}
        g = L.bce_grad(pred, clean)[:, None, :]
        for layer, cache, a, h in reversed(caches):
            if layer["activation"] == "relu":
                g = g * (a > 0)
            else:
                g = g * h * (1.0 - h)
            W = self.params[layer["name"] + ".W"]
            if layer["kind"] == "conv":
                g, dW, db = L.conv1d_backward(g, W, cache, layer["stride"], layer["padding"])
            else:
                g, dW, db = L.conv1d_transpose_backward(g, W, cache, layer["stride"], layer["padding"])
            grads[layer["name"] + ".W"] = dW
            grads[layer["name"] + ".b"] = db
        return loss, grads

    def loss(self, noisy, clean) -> float:
        pred = self.forward(noisy)
        return L.bce_loss(pred, np.asarray(clean, dtype=np.float64).reshape(pred.shape))

    def denoise(self, signals, batch_size=256):
        signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
        out = [self.forward(signals[i:i + batch_size]) for i in range(0, len(signals), batch_size)]
        return np.concatenate(out, axis=0)


def backward(model: CaeModel, noisy, clean):
    """Gradients of the mean BCE loss with respect to every parameter."""
    return model.loss_and_grads(noisy, clean)[1]
