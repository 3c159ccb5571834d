"""Building blocks of the spatio-temporal graph network."""

from functools import lru_cache
from typing import Optional, Union

import numpy as np

from ..errors import ConfigurationError, DimensionError
from ..models import NodeSignalTensor
from ..numerics import (Tensor, add, as_tensor, concat, constant,
                        conv1d_dilated, matmul, mul, relu, reshape, sigmoid,
                        softmax_rows, tanh)
from .params import AdjacencyFactors, BlockParams

SignalLike = Union[Tensor, NodeSignalTensor, np.ndarray]


def as_signal_tensor(x: SignalLike) -> Tensor:
    if isinstance(x, NodeSignalTensor):
        return Tensor(x.data)
    return as_tensor(x)


@lru_cache(maxsize=64)
def _difference_matrix(steps: int) -> np.ndarray:
    """Forward difference along time with the last row replicated."""
    diff = np.zeros((steps, steps))
    for t in range(steps - 1):
        diff[t, t] = -1.0
        diff[t, t + 1] = 1.0
    diff[steps - 1] = diff[steps - 2]
    diff.setflags(write=False)
    return diff


def temporal_lag_correction(x: SignalLike, weight: Tensor, bias: Tensor) -> Tensor:
    """Mix ``[x, x', x'']`` of a single-channel signal with a linear 1x1 conv.

    ``x`` is ``[..., N, T, 1]``; the output has the same shape.
    """
    x = as_signal_tensor(x)
    if x.shape[-1] != 1:
        raise ConfigurationError(
            f"temporal lag correction needs a single-channel signal, got C={x.shape[-1]}"
        )
    steps = x.shape[-2]
    if steps < 2:
        raise ConfigurationError(f"temporal lag correction needs T >= 2, got T={steps}")
    diff = constant(_difference_matrix(steps))
    first = matmul(diff, x)
    second = matmul(diff, first)
    return add(matmul(concat([x, first, second], axis=-1), weight), bias)


def pointwise_conv(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """1x1 convolution: a shared linear map over the channel axis."""
    return add(matmul(x, weight), bias)


def gated_tcn_layer(
    x: Tensor,
    w_filter: Tensor,
    w_gate: Tensor,
    dilation: int = 1,
    b_filter: Optional[Tensor] = None,
    b_gate: Optional[Tensor] = None,
) -> Tensor:
    """``tanh(W_f * x) ⊙ sigmoid(W_g * x)`` with weights shared across nodes."""
    channels = w_filter.shape[-1]
    b_filter = b_filter if b_filter is not None else constant(np.zeros(channels))
    b_gate = b_gate if b_gate is not None else constant(np.zeros(w_gate.shape[-1]))
    filtered = tanh(conv1d_dilated(x, w_filter, b_filter, dilation))
    gate = sigmoid(conv1d_dilated(x, w_gate, b_gate, dilation))
    return mul(filtered, gate)


def adaptive_adjacency(factors: AdjacencyFactors) -> Tensor:
    """``I_N + softmax_rows(relu(E_s E_t))``; every row sums to 2."""
    scores = relu(matmul(factors.E_s, factors.E_t))
    return add(constant(np.eye(factors.N)), softmax_rows(scores))


def fixed_correlation_adjacency(correlation: np.ndarray) -> np.ndarray:
    """Normalize a correlation matrix the same way learned scores are.

    The diagonal is zeroed before ``I_N + softmax_rows(relu(.))``.
    """
    scores = np.array(correlation, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise DimensionError(f"correlation must be square, got {scores.shape}")
    np.fill_diagonal(scores, 0.0)
    return adaptive_scores_to_adjacency(scores)


def adaptive_scores_to_adjacency(scores: np.ndarray) -> np.ndarray:
    positive = np.maximum(scores, 0.0)
    shifted = np.exp(positive - positive.max(axis=-1, keepdims=True))
    return np.eye(scores.shape[0]) + shifted / shifted.sum(axis=-1, keepdims=True)


def gcn_layer(adj: Tensor, x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """``H[:, t, :] = adj · x[:, t, :] · W + bias`` for every timepoint.

    ``x`` is ``[..., N, T, f]``.
    """
    adj, x = as_tensor(adj), as_tensor(x)
    if x.ndim < 3:
        raise DimensionError(f"gcn_layer needs x as [..., N, T, f], got {x.shape}")
    nodes, steps, channels = x.shape[-3:]
    if adj.shape != (nodes, nodes):
        raise DimensionError.mismatch("gcn_layer", adj.shape, x.shape)
    lead = x.shape[:-3]
    flat = reshape(x, lead + (nodes, steps * channels))
    mixed = reshape(matmul(adj, flat), x.shape)
    out = matmul(mixed, weight)
    return add(out, bias) if bias is not None else out


def st_block_forward(x: Tensor, block: BlockParams, adj: Tensor, dilation: int = 1) -> Tensor:
    """Gated TCN, graph convolution and a residual spanning the whole block."""
    z = gated_tcn_layer(
        x, block.filter_weight, block.gate_weight, dilation, block.filter_bias, block.gate_bias
    )
    return add(x, gcn_layer(adj, z, block.gcn_weight, block.gcn_bias))
