"""DSTG sample files: 16-byte header then float32 payload.

Header is ``b"DSTG"`` followed by little-endian u32 N, T, C. The payload holds
N*T*C little-endian float32 values, node-major, then time, then channel.
"""

from pathlib import Path
from typing import Tuple

import numpy as np

from ..errors import CorruptFileError, DatasetIOError
from ..models import NodeSignalTensor

SAMPLE_MAGIC = b"DSTG"
HEADER_BYTES = 16

_U32 = np.dtype("<u4")
_F32 = np.dtype("<f4")


def encode_sample(data: np.ndarray) -> bytes:
    array = np.asarray(data)
    if array.ndim != 3:
        raise CorruptFileError(f"sample must be [N, T, C], got {array.shape}")
    header = SAMPLE_MAGIC + np.asarray(array.shape, dtype=_U32).tobytes()
    return header + np.ascontiguousarray(array, dtype=_F32).tobytes()


def decode_header(buffer: bytes, source: str) -> Tuple[int, int, int]:
    if len(buffer) < HEADER_BYTES:
        raise CorruptFileError(f"{source}: file shorter than the {HEADER_BYTES}-byte header")
    if buffer[:4] != SAMPLE_MAGIC:
        raise CorruptFileError(f"{source}: bad magic {buffer[:4]!r}, expected {SAMPLE_MAGIC!r}")
    n, t, c = (int(v) for v in np.frombuffer(buffer[4:HEADER_BYTES], dtype=_U32))
    return n, t, c


def decode_sample(buffer: bytes, source: str = "<buffer>") -> np.ndarray:
    n, t, c = decode_header(buffer, source)
    expected = n * t * c * _F32.itemsize
    payload = len(buffer) - HEADER_BYTES
    if payload != expected:
        raise CorruptFileError(
            f"{source}: header says {n}x{t}x{c} ({expected} bytes), payload has {payload}"
        )
    return np.frombuffer(buffer, dtype=_F32, offset=HEADER_BYTES).reshape(n, t, c)


def write_sample(path: Path, data: np.ndarray) -> None:
    try:
        Path(path).write_bytes(encode_sample(data))
    except OSError as e:
        raise DatasetIOError(f"cannot write sample {path}: {e}") from e


def read_sample_array(path: Path) -> np.ndarray:
    """Raw float32 payload as ``[N, T, C]``."""
    try:
        buffer = Path(path).read_bytes()
    except FileNotFoundError as e:
        raise DatasetIOError(f"sample file not found: {path}") from e
    except OSError as e:
        raise DatasetIOError(f"cannot read sample {path}: {e}") from e
    return decode_sample(buffer, str(path))


def read_sample(path: Path) -> NodeSignalTensor:
    return NodeSignalTensor(data=read_sample_array(path).astype(np.float64))
