"""Versioned binary model file.

Layout::

    8 bytes   magic b"VLCNCAE\\0"
    uint32    format version (little-endian)
    uint32    header length in bytes
    header    UTF-8 JSON: architecture, seed, epochs, init scheme, parameter table
    blocks    float64 little-endian parameter arrays in parameter-table order
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError
from .model import CaeArchitecture, CaeModel, INIT_SCHEME

MAGIC = b"VLCNCAE\0"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")


def model_to_bytes(model: CaeModel, extra: dict | None = None) -> bytes:
    names = model.param_names()
    header = {
        "format_version": FORMAT_VERSION,
        "architecture": model.architecture.to_dict(),
        "seed": model.seed,
        "epochs": model.epochs,
        "init": INIT_SCHEME,
        "params": [[name, list(model.params[name].shape)] for name in names],
    }
    if extra:
        header["metadata"] = extra
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(hbytes)), hbytes]
    for name in names:
        parts.append(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())
    return b"".join(parts)


def save_model(model: CaeModel, path, extra: dict | None = None) -> Path:
    path = Path(path)
    path.write_bytes(model_to_bytes(model, extra))
    return path


def _take(buf, pos, n):
    if pos + n > len(buf):
        raise ModelFormatError("unexpected end of model file")
    return buf[pos:pos + n], pos + n


def model_from_bytes(buf: bytes):
    """Return ``(model, metadata)``."""
    magic, pos = _take(buf, 0, len(MAGIC))
    if magic != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    raw, pos = _take(buf, pos, 4)
    version = _U32.unpack(raw)[0]
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version} (this build reads {FORMAT_VERSION})"
        )
    raw, pos = _take(buf, pos, 4)
    hbytes, pos = _take(buf, pos, _U32.unpack(raw)[0])
    try:
        header = json.loads(hbytes.decode("utf-8"))
        arch = CaeArchitecture.from_dict(header["architecture"])
        table = header["params"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None
    params = {}
    for name, shape in table:
        count = int(np.prod(shape)) if shape else 1
        raw, pos = _take(buf, pos, 8 * count)
        params[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    if pos != len(buf):
        raise ModelFormatError(f"{len(buf) - pos} trailing bytes after parameter blocks")
    model = CaeModel(arch, params, seed=int(header.get("seed", 0)), epochs=int(header.get("epochs", 0)))
    expected = CaeModel.initialize(arch, 0)
    for name in expected.param_names():
        if name not in params or params[name].shape != expected.params[name].shape:
            raise ModelFormatError(f"parameter {name} missing or mis-shaped for the architecture")
    return model, header.get("metadata", {})


def load_model(path):
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    return model_from_bytes(path.read_bytes())[0]


def load_model_with_metadata(path):
    return model_from_bytes(Path(path).read_bytes())
