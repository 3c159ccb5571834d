"""DGCP container: versioned binary file of named float64 tensors.

Layout (little-endian): ``b"DGCP"``, u32 version, u32 kind, u32 header
length, UTF-8 JSON header, u32 record count, then per record u32 name
length, name bytes, u32 rank, u32 dims..., row-major float64 values.
"""

import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import CorruptFileError, DatasetIOError
from ..models import ModelConfig
from ..numerics import Tensor
from .params import ModelParams

log = logging.getLogger(__name__)

MAGIC = b"DGCP"
FORMAT_VERSION = 1
KIND_PARAMS = 0
KIND_GRAPH_BUNDLE = 1

_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


class Container(NamedTuple):
    kind: int
    header: Dict[str, Any]
    tensors: "OrderedDict[str, np.ndarray]"


def _u32(*values: int) -> bytes:
    return np.asarray(values, dtype=_U32).tobytes()


def encode_container(kind: int, header: Dict[str, Any], tensors: Dict[str, np.ndarray]) -> bytes:
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, _u32(FORMAT_VERSION, kind, len(header_bytes)), header_bytes, _u32(len(tensors))]
    for name, array in tensors.items():
        array = np.ascontiguousarray(array, dtype=_F64)
        name_bytes = name.encode("utf-8")
        parts.append(_u32(len(name_bytes)))
        parts.append(name_bytes)
        parts.append(_u32(array.ndim, *array.shape))
        parts.append(array.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, buffer: bytes, source: str):
        self.buffer = buffer
        self.offset = 0
        self.source = source

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.buffer):
            raise CorruptFileError(f"{self.source}: truncated at byte {self.offset}")
        chunk = self.buffer[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def u32(self, count: int = 1) -> Tuple[int, ...]:
        raw = self.take(4 * count)
        return tuple(int(v) for v in np.frombuffer(raw, dtype=_U32, count=count))

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype=_F64, count=count).astype(np.float64)


def decode_container(buffer: bytes, source: str = "<buffer>") -> Container:
    reader = _Reader(buffer, source)
    magic = reader.take(4)
    if magic != MAGIC:
        raise CorruptFileError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    version, kind, header_len = reader.u32(3)
    if version != FORMAT_VERSION:
        raise CorruptFileError(f"{source}: unsupported format version {version}")
    try:
        header = json.loads(reader.take(header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptFileError(f"{source}: unreadable header: {e}") from e
    (count,) = reader.u32()
    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for _ in range(count):
        (name_len,) = reader.u32()
        name = reader.take(name_len).decode("utf-8")
        (rank,) = reader.u32()
        dims = reader.u32(rank) if rank else ()
        size = int(np.prod(dims)) if dims else 1
        tensors[name] = reader.f64(size).reshape(dims)
    if reader.offset != len(buffer):
        raise CorruptFileError(f"{source}: {len(buffer) - reader.offset} trailing bytes")
    return Container(kind, header, tensors)


def write_container(path: Path, kind: int, header: Dict[str, Any], tensors: Dict[str, np.ndarray]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_container(kind, header, tensors))
    except OSError as e:
        raise DatasetIOError(f"cannot write {path}: {e}") from e
    log.info(f"Wrote {path} ({len(tensors)} tensors)")
    return path


def read_container(path: Path, expected_kind: Optional[int] = None) -> Container:
    path = Path(path)
    try:
        buffer = path.read_bytes()
    except OSError as e:
        raise DatasetIOError(f"cannot read {path}: {e}") from e
    container = decode_container(buffer, str(path))
    if expected_kind is not None and container.kind != expected_kind:
        raise CorruptFileError(f"{path}: container kind {container.kind}, expected {expected_kind}")
    return container


def save_checkpoint(path: Path, params: ModelParams, metadata: Optional[Dict[str, Any]] = None) -> Path:
    header = {
        "model_config": params.config.model_dump(mode="json"),
        "frozen": params.frozen_names(),
        "metadata": metadata or {},
    }
    tensors: Dict[str, np.ndarray] = OrderedDict((n, t.data) for n, t in params.named_tensors())
    if params.fixed_adjacency is not None:
        tensors["fixed_adjacency"] = params.fixed_adjacency
    return write_container(path, KIND_PARAMS, header, tensors)


def load_checkpoint(path: Path) -> ModelParams:
    container = read_container(path, KIND_PARAMS)
    config = ModelConfig.model_validate(container.header["model_config"])
    arrays = container.tensors
    fixed = arrays.pop("fixed_adjacency", None)
    frozen = set(container.header.get("frozen", []))
    tensors = OrderedDict(
        (n, Tensor(a, requires_grad=n not in frozen, name=n)) for n, a in arrays.items()
    )
    return ModelParams(config, tensors, fixed)


def checkpoint_metadata(path: Path) -> Dict[str, Any]:
    """The free-form metadata block stored by ``save_checkpoint``."""
    return dict(read_container(path, KIND_PARAMS).header.get("metadata", {}))
