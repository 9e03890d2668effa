"""
Model checkpoints

Layout::

    magic      8 bytes   b"EBTRVNN\\x00"
    version    uint32    little-endian
    header_len uint64    little-endian
    header     JSON text (sorted keys): variant, config, tensors manifest
    payload    raw little-endian scalars, tensors back to back

Each manifest entry carries name, shape, dtype, offset and nbytes; offsets
are relative to the start of the payload.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import torch
import torch.nn as nn

from ..errors import (
    CheckpointError,
    CheckpointVersionError,
    MissingTensorError,
    TensorShapeError,
    UnexpectedTensorError,
    VariantMismatchError,
)
from ..utils.logging import get_logger

logger = get_logger(__name__)

MAGIC = b"EBTRVNN\x00"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<8sIQ")

_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
}


def _manifest(model: nn.Module):
    entries, chunks, offset = [], [], 0
    for name, param in model.named_parameters():
        if param.dtype not in _DTYPES:
            raise CheckpointError(f"Parameter {name} has unsupported dtype {param.dtype}")
        array = param.detach().cpu().numpy().astype(np.dtype(_DTYPES[param.dtype]), copy=False)
        raw = array.tobytes(order="C")
        entries.append({
            "name": name,
            "shape": list(array.shape),
            "dtype": _DTYPES[param.dtype],
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    return entries, b"".join(chunks)


def save_checkpoint(path: Union[str, Path], model: nn.Module, variant: str,
                    config: Optional[Dict[str, Any]] = None) -> Path:
    """Write every named parameter of ``model``; the same model always gives the same bytes"""
    entries, payload = _manifest(model)
    header = json.dumps(
        {"variant": variant, "config": config or {}, "tensors": entries},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)))
        f.write(header)
        f.write(payload)

    logger.info(f"Saved checkpoint {path} ({variant}, {len(entries)} tensors, {len(payload)} payload bytes)")
    return path


def read_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Header and named arrays; any damage to the preamble or header is a version error"""
    data = Path(path).read_bytes()
    if len(data) < _PREAMBLE.size:
        raise CheckpointVersionError(f"{path}: file too short for a checkpoint header")

    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointVersionError(f"{path}: bad magic bytes {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, expected {FORMAT_VERSION}")

    start = _PREAMBLE.size
    try:
        header = json.loads(data[start:start + header_len].decode("utf-8"))
        entries = header["tensors"]
        header["variant"]
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as e:
        raise CheckpointVersionError(f"{path}: unreadable header ({e})") from None

    payload = memoryview(data)[start + header_len:]
    arrays = {}
    for entry in entries:
        end = entry["offset"] + entry["nbytes"]
        if end > len(payload):
            raise CheckpointError(f"{path}: tensor {entry['name']} runs past the end of the file")
        array = np.frombuffer(payload[entry["offset"]:end], dtype=np.dtype(entry["dtype"]))
        arrays[entry["name"]] = array.reshape(entry["shape"]).copy()
    return header, arrays


def load_checkpoint(path: Union[str, Path], model: nn.Module, variant: Optional[str] = None) -> Dict[str, Any]:
    """Copy stored tensors into ``model`` in place; returns the header"""
    header, arrays = read_checkpoint(path)
    if variant is not None and header["variant"] != variant:
        raise VariantMismatchError(f"{path}: checkpoint holds {header['variant']!r}, model is {variant!r}")

    expected = dict(model.named_parameters())
    for name in expected:
        if name not in arrays:
            raise MissingTensorError(f"{path}: missing tensor {name}")
    for name in arrays:
        if name not in expected:
            raise UnexpectedTensorError(f"{path}: unexpected tensor {name}")

    with torch.no_grad():
        for name, param in expected.items():
            array = arrays[name]
            if tuple(array.shape) != tuple(param.shape):
                raise TensorShapeError(
                    f"{path}: tensor {name} has shape {tuple(array.shape)}, model expects {tuple(param.shape)}"
                )
            param.copy_(torch.from_numpy(array).to(param.dtype))

    logger.info(f"Loaded checkpoint {path} ({header['variant']}, {len(arrays)} tensors)")
    return header
