"""Adam with bias-corrected moments and an optional per-filter max-norm constraint."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState, config: AdamConfig = AdamConfig()):
    """Update ``params`` in place and return ``(params, state)``.

    ``p -= lr * m_hat / (sqrt(v_hat) + eps)`` with ``m_hat = m / (1 - beta1**t)``
    and ``v_hat = v / (1 - beta2**t)``.
    """
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name in sorted(params):
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(params[name])
            state.v[name] = np.zeros_like(params[name])
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        params[name] -= config.lr * (m / c1) / (np.sqrt(v / c2) + config.epsilon)
    return params, state


def apply_max_norm(weight: np.ndarray, max_norm: float, filter_axis: int = 0) -> np.ndarray:
    """Rescale each filter whose L2 norm exceeds ``max_norm`` back onto the ball."""
    axes = tuple(i for i in range(weight.ndim) if i != filter_axis)
    norms = np.sqrt(np.sum(weight * weight, axis=axes, keepdims=True))
    scale = np.where(norms > max_norm, max_norm / np.maximum(norms, 1e-300), 1.0)
    weight *= scale
    return weight
