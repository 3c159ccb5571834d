"""Named random substreams derived from one root seed."""

import zlib
from typing import Optional

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name`` (e.g. ``"shuffle.fold2"``).

    The name is hashed with CRC32 so streams are stable across processes.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(key,)))


def stream_tag(fold: Optional[int]) -> str:
    """``fold{i}`` for a cross-validation fold, ``full`` for whole-dataset fits."""
    return "full" if fold is None else f"fold{fold}"


def fold_stream(seed: int, purpose: str, fold: Optional[int]) -> np.random.Generator:
    return substream(seed, f"{purpose}.{stream_tag(fold)}")
