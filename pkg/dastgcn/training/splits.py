"""Stratified k-fold splits and stratified subsampling."""

from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ContractError
from ..rng import substream

Split = Tuple[np.ndarray, np.ndarray]


def kfold_split(labels: Sequence[int], folds: int, seed: int) -> List[Split]:
    """Stratified folds as ``(train_idx, test_idx)`` pairs.

    Each class is shuffled and dealt round-robin over the folds. The dealing
    position carries over from one class to the next so fold sizes differ by
    at most one.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise ContractError(f"need at least 2 folds, got {folds}")
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size == 0:
        raise ContractError("cannot split an empty label set")
    if folds > counts.min():
        raise ContractError(
            f"{folds} folds exceed the smallest class ({classes[counts.argmin()]} "
            f"has {counts.min()} samples)"
        )

    rng = substream(seed, "kfold")
    buckets: List[List[int]] = [[] for _ in range(folds)]
    offset = 0
    for cls in classes:
        members = rng.permutation(np.flatnonzero(labels == cls))
        for position, index in enumerate(members):
            buckets[(offset + position) % folds].append(int(index))
        offset = (offset + members.size) % folds

    everything = np.arange(labels.size)
    splits = []
    for bucket in buckets:
        test = np.sort(np.asarray(bucket, dtype=np.int64))
        train = np.setdiff1d(everything, test)
        splits.append((train, test))
    return splits


def stratified_subsample(labels: Sequence[int], per_class: int, seed: int) -> np.ndarray:
    """Sorted indices of ``per_class`` samples drawn from every class."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    short = {int(c): int(per_class - n) for c, n in zip(classes, counts) if n < per_class}
    if short:
        detail = ", ".join(f"class {c} short by {s}" for c, s in short.items())
        raise ContractError(f"cannot draw {per_class} samples per class: {detail}")
    rng = substream(seed, f"subsample.{per_class}")
    chosen = [rng.choice(np.flatnonzero(labels == c), size=per_class, replace=False) for c in classes]
    return np.sort(np.concatenate(chosen))
