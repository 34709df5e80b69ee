"""Time-series container, capture I/O, OOK pulse trains and the channel model.

The received signal is modelled as ``y = R * (x (*) h) + dc + v`` where ``(*)``
is causal discrete convolution.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CaptureFormatError, DataError

PathLike = Union[str, Path]

_FLOAT_FMT = ".17g"


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real-valued signal.

    Sample ``i`` sits at time ``i / sample_rate_hz``. The sample buffer is a
    read-only float64 copy, so instances can be shared freely.
    """

    samples: np.ndarray
    sample_rate_hz: float
    label: Optional[str] = None

    def __post_init__(self):
        arr = _frozen_array(self.samples)
        if arr.size < 1:
            raise DataError("no samples")
        if not np.all(np.isfinite(arr)):
            raise DataError("samples contain NaN or Inf")
        fs = float(self.sample_rate_hz)
        if not (math.isfinite(fs) and fs > 0):
            raise DataError(f"sample_rate_hz must be positive, got {self.sample_rate_hz!r}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", fs)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.label == other.label
            and np.array_equal(self.samples, other.samples)
        )

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate_hz

    def with_samples(self, samples) -> "TimeSeries":
        return TimeSeries(samples, self.sample_rate_hz, self.label)


@dataclass(frozen=True)
class OokPattern:
    """Periodic on-off keyed pulse pattern (one ON segment then one OFF segment)."""

    on_duration_s: float
    off_duration_s: float
    amplitude_on: float = 1.0
    amplitude_off: float = 0.0
    n_pulses: int = 1

    def __post_init__(self):
        if not (self.on_duration_s > 0 and self.off_duration_s > 0):
            raise DataError("pulse durations must be positive")
        for name in ("amplitude_on", "amplitude_off"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must lie in [0, 1], got {v}")
        if not self.amplitude_on > self.amplitude_off:
            raise DataError("amplitude_on must exceed amplitude_off")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise DataError("n_pulses must be a positive integer")

    def segment_lengths(self, sample_rate_hz: float) -> tuple[int, int]:
        # per-segment floor; fractional remainders are dropped, never carried
        n_on = math.floor(self.on_duration_s * sample_rate_hz)
        n_off = math.floor(self.off_duration_s * sample_rate_hz)
        return n_on, n_off


@dataclass(frozen=True)
class ChannelParams:
    responsivity: float = 1.0
    impulse_response: tuple = (1.0,)
    dc_offset: float = 0.0

    def __post_init__(self):
        h = tuple(float(v) for v in np.asarray(self.impulse_response, dtype=float).reshape(-1))
        if not h:
            raise DataError("impulse_response must be non-empty")
        if not self.responsivity > 0:
            raise DataError("responsivity must be positive")
        object.__setattr__(self, "impulse_response", h)


def normalize_unit(ts: TimeSeries) -> TimeSeries:
    """Affinely map samples onto [0, 1] (min -> 0, max -> 1)."""
    x = ts.samples
    lo = x.min()
    hi = x.max()
    if not hi > lo:
        raise DataError("cannot normalize a constant series (zero dynamic range)")
    return ts.with_samples((x - lo) / (hi - lo))


def generate_ook(pattern: OokPattern, sample_rate_hz: float, label: Optional[str] = None) -> TimeSeries:
    n_on, n_off = pattern.segment_lengths(sample_rate_hz)
    if n_on < 1 or n_off < 1:
        raise DataError(
            f"pulse segments shorter than one sample at {sample_rate_hz} Hz "
            f"(on={n_on}, off={n_off} samples)"
        )
    period = np.concatenate(
        [np.full(n_on, pattern.amplitude_on), np.full(n_off, pattern.amplitude_off)]
    )
    return TimeSeries(np.tile(period, pattern.n_pulses), sample_rate_hz, label)


def apply_channel(x: TimeSeries, ch: ChannelParams, noise: TimeSeries) -> TimeSeries:
    """Pass ``x`` through the channel and add ``noise``.

    ``y[i] = R * sum_j h[j] * x[i - j] + dc + noise[i]`` with zero history
    before ``x[0]``; the output has the length of ``x``. Extra noise samples
    beyond ``len(x)`` are ignored.
    """
    if x.sample_rate_hz != noise.sample_rate_hz:
        raise DataError(
            f"sample-rate mismatch: signal {x.sample_rate_hz} Hz, noise {noise.sample_rate_hz} Hz"
        )
    n = len(x)
    if len(noise) < n:
        raise DataError(f"noise has {len(noise)} samples, need at least {n}")
    h = np.asarray(ch.impulse_response, dtype=np.float64)
    conv = np.convolve(x.samples, h)[:n]
    y = ch.responsivity * conv + ch.dc_offset + noise.samples[:n]
    return TimeSeries(y, x.sample_rate_hz, x.label)


# -- capture files ---------------------------------------------------------


def _parse_header_value(line: str, key: str, lineno: int) -> str:
    name, sep, value = line.partition("=")
    if not sep or name.strip() != key:
        raise CaptureFormatError(f"line {lineno}: expected '{key}=<value>', got {line!r}")
    return value.strip()


def _read_csv(path: Path) -> TimeSeries:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip().startswith("sample_rate_hz"):
        raise CaptureFormatError(f"{path}: line 1: missing 'sample_rate_hz=<float>' header")
    raw_fs = _parse_header_value(lines[0].strip(), "sample_rate_hz", 1)
    try:
        fs = float(raw_fs)
    except ValueError:
        raise CaptureFormatError(f"{path}: line 1: bad sample_rate_hz {raw_fs!r}") from None
    start = 1
    label = None
    if len(lines) > 1 and lines[1].startswith("label="):
        label = lines[1][len("label="):]
        start = 2
    values = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise CaptureFormatError(
                f"{path}: line {lineno} (sample row {len(values)}): cannot parse {text!r} as float"
            ) from None
    if not values:
        raise CaptureFormatError(f"{path}: no samples")
    try:
        return TimeSeries(values, fs, label)
    except DataError as exc:
        raise CaptureFormatError(f"{path}: {exc}") from None


def _read_json(path: Path) -> TimeSeries:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CaptureFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise CaptureFormatError(f"{path}: top level must be an object")
    if "sample_rate_hz" not in obj:
        raise CaptureFormatError(f"{path}: missing field 'sample_rate_hz'")
    samples = obj.get("samples")
    if not isinstance(samples, list):
        raise CaptureFormatError(f"{path}: field 'samples' must be a list")
    if not samples:
        raise CaptureFormatError(f"{path}: no samples")
    for i, v in enumerate(samples):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise CaptureFormatError(f"{path}: field 'samples[{i}]' is not a number: {v!r}")
    fs = obj["sample_rate_hz"]
    if isinstance(fs, bool) or not isinstance(fs, (int, float)):
        raise CaptureFormatError(f"{path}: field 'sample_rate_hz' is not a number")
    label = obj.get("label")
    try:
        return TimeSeries(samples, fs, label)
    except DataError as exc:
        raise CaptureFormatError(f"{path}: {exc}") from None


def _infer_format(path: Path, fmt: Optional[str]) -> str:
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt not in ("csv", "json"):
        raise DataError(f"unknown capture format {fmt!r}")
    return fmt


def load_capture(path: PathLike, format: Optional[str] = None) -> TimeSeries:
    """Read a capture file (CSV or JSON; inferred from the suffix if not given)."""
    path = Path(path)
    fmt = _infer_format(path, format)
    if not path.is_file():
        raise DataError(f"capture file not found: {path}")
    return _read_csv(path) if fmt == "csv" else _read_json(path)


def save_capture(ts: TimeSeries, path: PathLike, format: Optional[str] = None) -> Path:
    """Write ``ts`` so that :func:`load_capture` returns identical floats."""
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "csv":
        parts = [f"sample_rate_hz={ts.sample_rate_hz!r}\n"]
        if ts.label is not None:
            if "\n" in ts.label:
                raise DataError("CSV labels cannot contain newlines")
            parts.append(f"label={ts.label}\n")
        parts.extend(f"{v:{_FLOAT_FMT}}\n" for v in ts.samples.tolist())
        text = "".join(parts)
    else:
        obj = {"sample_rate_hz": ts.sample_rate_hz}
        if ts.label is not None:
            obj["label"] = ts.label
        # repr() of a Python float is the shortest exact round-trip form
        obj["samples"] = ts.samples.tolist()
        text = json.dumps(obj) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
