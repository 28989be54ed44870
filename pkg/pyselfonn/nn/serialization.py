from __future__ import annotations

import os
import struct
import zlib
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ModelFormatError, SpecError
from .NetworkSpec import NetworkSpec, format_spec, parse_spec
from .SelfONN import check_params

MAGIC = b"SONN"
FORMAT_VERSION = 1
_FLOAT = np.dtype("<f4")


def dumps_model(spec: NetworkSpec, params: Sequence[np.ndarray]) -> bytes:
    """magic | version byte | u32 spec length | spec text | float32 params | u32 CRC32."""
    check_params(spec, params)
    spec_bytes = format_spec(spec).encode("utf-8")
    payload = bytearray(MAGIC)
    payload += struct.pack("<BI", FORMAT_VERSION, len(spec_bytes))
    payload += spec_bytes
    for p in params:
        payload += np.ascontiguousarray(p, dtype=_FLOAT).tobytes()
    payload += struct.pack("<I", zlib.crc32(bytes(payload)) & 0xFFFFFFFF)
    return bytes(payload)


def loads_model(data: bytes) -> Tuple[NetworkSpec, List[np.ndarray]]:
    header = len(MAGIC) + 5
    if len(data) < header + 4:
        raise ModelFormatError("model file is truncated")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, spec_len = struct.unpack("<BI", data[len(MAGIC) : header])
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    (crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != crc:
        raise ModelFormatError("checksum mismatch")
    if header + spec_len > len(data) - 4:
        raise ModelFormatError("spec block runs past the end of the file")

    try:
        spec = parse_spec(data[header : header + spec_len].decode("utf-8"))
    except (UnicodeDecodeError, SpecError) as e:
        raise ModelFormatError(f"invalid spec block: {e}") from e

    body = data[header + spec_len : -4]
    expected = sum(layer.n_params() for layer in spec.layers) * _FLOAT.itemsize
    if len(body) != expected:
        raise ModelFormatError(
            f"parameter block has {len(body)} bytes, spec requires {expected}"
        )
    params: List[np.ndarray] = []
    offset = 0
    for layer in spec.layers:
        for shape in (layer.weight_shape(), (layer.out_channels,)):
            count = int(np.prod(shape))
            buf = np.frombuffer(body, dtype=_FLOAT, count=count, offset=offset)
            params.append(buf.astype(np.float32).reshape(shape))
            offset += count * _FLOAT.itemsize
    return spec, params


def save_model(spec: NetworkSpec, params: Sequence[np.ndarray], path: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(dumps_model(spec, params))


def load_model(path: str) -> Tuple[NetworkSpec, List[np.ndarray]]:
    with open(path, "rb") as f:
        return loads_model(f.read())
