"""Paired noisy/clean OOK pulse datasets.

On disk a dataset is a directory holding ``manifest.json`` plus ``noisy.npy``
and ``clean.npy`` (float64 arrays of shape ``(count, input_length)``, one
capture record per row, all sampled at the manifest's rate).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError
from .signals import ChannelParams, OokPattern, TimeSeries, apply_channel, generate_ook, normalize_unit
from .synth import NoiseRecipe, synthesize

DATASET_FORMAT_VERSION = 1


def sub_seed(seed: int, counter: int) -> int:
    """Derive an independent 63-bit seed from ``(seed, counter)`` via SeedSequence."""
    state = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), int(counter)]).generate_state(1, np.uint64)
    return int(state[0]) >> 1


@dataclass
class Dataset:
    noisy: np.ndarray
    clean: np.ndarray
    labels: list
    sample_rate_hz: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.noisy.shape != self.clean.shape or self.noisy.ndim != 2:
            raise DataError("noisy and clean must be matching (count, length) arrays")
        if len(self.labels) != self.noisy.shape[0]:
            raise DataError("one label per pair required")

    def __len__(self):
        return self.noisy.shape[0]

    @property
    def input_length(self) -> int:
        return self.noisy.shape[1]

    def pair(self, i: int):
        return (TimeSeries(self.noisy[i], self.sample_rate_hz, self.labels[i]),
                TimeSeries(self.clean[i], self.sample_rate_hz, self.labels[i]))


def make_pair(pattern: OokPattern, recipe: NoiseRecipe, channel: ChannelParams,
              input_length: int, sample_rate_hz: float, seed: int, label: Optional[str] = None):
    """One normalized ``(noisy, clean)`` record of ``input_length`` samples.

    The pulse train starts at a random phase drawn from ``seed``; the noise
    recipe is re-seeded from ``seed`` as well.
    """
    n_on, n_off = pattern.segment_lengths(sample_rate_hz)
    period = n_on + n_off
    if input_length < period:
        raise DataError(f"input_length {input_length} shorter than one pulse period ({period} samples)")
    rng = np.random.Generator(np.random.PCG64(seed))
    offset = int(rng.integers(0, period))
    n_pulses = math.ceil((input_length + offset) / period)
    train = generate_ook(
        OokPattern(pattern.on_duration_s, pattern.off_duration_s,
                   pattern.amplitude_on, pattern.amplitude_off, n_pulses),
        sample_rate_hz,
    )
    clean = TimeSeries(train.samples[offset:offset + input_length], sample_rate_hz, label)
    noise_recipe = NoiseRecipe(recipe.components, input_length, sub_seed(seed, 1), recipe.mean,
                               sample_rate_hz, recipe.discard_prefix)
    noise = synthesize(noise_recipe)
    noisy = apply_channel(clean, channel, noise)
    return normalize_unit(noisy), normalize_unit(clean)


def build_dataset(count: int, pattern: OokPattern, recipe: NoiseRecipe, input_length: int,
                  sample_rate_hz: float, channel: ChannelParams = ChannelParams(),
                  seed: int = 0, label: str = "synthetic", holdout_fraction: float = 0.3) -> Dataset:
    """Generate ``count`` pairs; pair ``i`` is seeded with ``sub_seed(seed, i)``."""
    if count < 1:
        raise DataError("count must be at least 1")
    noisy = np.empty((count, input_length))
    clean = np.empty((count, input_length))
    for i in range(count):
        nz, cl = make_pair(pattern, recipe, channel, input_length, sample_rate_hz, sub_seed(seed, i), label)
        noisy[i] = nz.samples
        clean[i] = cl.samples
    meta = {
        "seed": seed,
        "holdout_fraction": holdout_fraction,
        "pattern": {
            "on_duration_s": pattern.on_duration_s,
            "off_duration_s": pattern.off_duration_s,
            "amplitude_on": pattern.amplitude_on,
            "amplitude_off": pattern.amplitude_off,
        },
        "noise": {k: v for k, v in recipe.to_dict().items() if k not in ("length", "seed", "sample_rate_hz")},
        "channel": {
            "responsivity": channel.responsivity,
            "impulse_response": list(channel.impulse_response),
            "dc_offset": channel.dc_offset,
        },
    }
    return Dataset(noisy, clean, [label] * count, float(sample_rate_hz), meta)


def save_dataset(ds: Dataset, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": DATASET_FORMAT_VERSION,
        "count": len(ds),
        "input_length": ds.input_length,
        "sample_rate_hz": ds.sample_rate_hz,
        "scenarios": sorted(set(ds.labels)),
        "labels": list(ds.labels),
        "files": {"noisy": "noisy.npy", "clean": "clean.npy"},
        "metadata": ds.metadata,
    }
    np.save(d / "noisy.npy", np.ascontiguousarray(ds.noisy, dtype="<f8"), allow_pickle=False)
    np.save(d / "clean.npy", np.ascontiguousarray(ds.clean, dtype="<f8"), allow_pickle=False)
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return d


def load_dataset(directory) -> Dataset:
    d = Path(directory)
    mpath = d / "manifest.json"
    if not mpath.is_file():
        raise DataError(f"dataset manifest not found: {mpath}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{mpath}: line {exc.lineno}: {exc.msg}") from None
    if manifest.get("format_version") != DATASET_FORMAT_VERSION:
        raise DataError(f"unsupported dataset format version {manifest.get('format_version')!r}")
    try:
        noisy = np.load(d / manifest["files"]["noisy"], allow_pickle=False)
        clean = np.load(d / manifest["files"]["clean"], allow_pickle=False)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read dataset arrays in {d}: {exc}") from None
    if noisy.shape != (manifest["count"], manifest["input_length"]):
        raise DataError(f"noisy array shape {noisy.shape} disagrees with manifest")
    return Dataset(noisy.astype(np.float64), clean.astype(np.float64), manifest["labels"],
                   float(manifest["sample_rate_hz"]), manifest.get("metadata", {}))
