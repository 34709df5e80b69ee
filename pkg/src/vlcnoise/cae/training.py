"""Seeded training loop and the RMSE metric."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError, NumericalError
from ..signals import TimeSeries
from .model import CaeModel
from .optim import AdamConfig, AdamState, adam_step, apply_max_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 50
    adam: AdamConfig = AdamConfig()
    seed: int = 0
    max_norm: Optional[float] = 4.0
    holdout_fraction: float = 0.3

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise DataError("epochs and batch_size must be positive")
        if self.max_norm is not None and not self.max_norm > 0:
            raise DataError("max_norm must be positive")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise DataError("holdout_fraction must lie in [0, 1)")


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    holdout_loss: list = field(default_factory=list)

    def rows(self):
        for i, tl in enumerate(self.train_loss):
            hl = self.holdout_loss[i] if i < len(self.holdout_loss) else float("nan")
            yield i + 1, tl, hl


def split_indices(n: int, holdout_fraction: float = 0.3, seed: int = 0):
    """Seeded permutation split into ``(train_idx, holdout_idx)``."""
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    n_hold = int(round(n * holdout_fraction))
    return np.sort(perm[n_hold:]), np.sort(perm[:n_hold])


def train(model: CaeModel, noisy, clean, cfg: TrainConfig = TrainConfig()):
    """Train ``model`` in place on paired ``(n, input_length)`` arrays.

    A ``holdout_fraction`` share is held out by a seeded split; the rest is
    reshuffled every epoch and consumed in mini-batches (the last one may be
    short). Returns ``(model, history)``.
    """
    noisy = np.asarray(noisy, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    if noisy.shape != clean.shape or noisy.ndim != 2:
        raise DataError(f"expected matching (n, length) arrays, got {noisy.shape} and {clean.shape}")
    n, length = noisy.shape
    if length != model.architecture.input_length:
        raise DataError(
            f"dataset signal length {length} does not match model input_length "
            f"{model.architecture.input_length}"
        )
    if n < cfg.batch_size:
        raise DataError(f"dataset has {n} pairs, fewer than batch_size {cfg.batch_size}")
    if (noisy.min() < 0 or noisy.max() > 1 or clean.min() < 0 or clean.max() > 1):
        raise DataError("signals must be normalized to [0, 1]")
    train_idx, hold_idx = split_indices(n, cfg.holdout_fraction, cfg.seed)
    rng = np.random.Generator(np.random.PCG64([cfg.seed, 1]))
    state = AdamState()
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        order = train_idx[rng.permutation(train_idx.size)]
        total = 0.0
        for bi, start in enumerate(range(0, order.size, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(noisy[idx], clean[idx])
            if not math.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch + 1}, batch {bi}")
            adam_step(model.params, grads, state, cfg.adam)
            if cfg.max_norm is not None:
                apply_max_norm(model.params["enc0.W"], cfg.max_norm)
            total += loss * idx.size
        history.train_loss.append(total / order.size)
        if hold_idx.size:
            history.holdout_loss.append(model.loss(noisy[hold_idx], clean[hold_idx]))
        model.epochs += 1
        log.debug("epoch %d train %.6f", epoch + 1, history.train_loss[-1])
    return model, history


def rmse(denoised, clean) -> float:
    """``sqrt(mean((clean - denoised)**2))``."""
    a = denoised.samples if isinstance(denoised, TimeSeries) else np.asarray(denoised, dtype=np.float64)
    b = clean.samples if isinstance(clean, TimeSeries) else np.asarray(clean, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((b - a) ** 2)))
