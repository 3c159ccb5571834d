"""Cross-entropy on softmax probabilities."""

from typing import Sequence, Union

import numpy as np

from config.training import PROBABILITY_FLOOR

from ..errors import ContractError, DimensionError
from ..numerics import Tensor, as_tensor, constant, log_clamped, mean, mul, neg
from ..numerics import tensor_sum

Labels = Union[int, Sequence[int], np.ndarray]


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    if np.any(labels < 0) or np.any(labels >= num_classes):
        raise ContractError(f"labels {labels.tolist()} out of range for {num_classes} classes")
    encoded = np.zeros((labels.size, num_classes))
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def cross_entropy_loss(probs: Tensor, labels: Labels, floor: float = PROBABILITY_FLOOR) -> Tensor:
    """``-log(probs[label])`` with a clamped log; batches are averaged.

    ``probs`` is ``[num_classes]`` with a scalar label or ``[B, num_classes]``
    with ``B`` labels.
    """
    probs = as_tensor(probs)
    single = probs.ndim == 1
    label_array = np.atleast_1d(np.asarray(labels))
    if not np.issubdtype(label_array.dtype, np.integer):
        raise ContractError(f"labels must be integers, got {label_array.dtype}")
    rows = 1 if single else probs.shape[0]
    if probs.ndim not in (1, 2) or label_array.size != rows:
        raise DimensionError(
            f"cross_entropy_loss: probs {probs.shape} do not match {label_array.size} label(s)"
        )
    targets = one_hot(label_array, probs.shape[-1])
    if single:
        targets = targets[0]
    picked = tensor_sum(mul(log_clamped(probs, floor), constant(targets)), axis=-1)
    return neg(mean(picked))
