"""Full forward pass: lag correction, scale-up, block stack and readout."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, ContractError, DimensionError
from ..models import ModelConfig, NodeSignalTensor
from ..numerics import (Tensor, add, constant, matmul, mean, mul, reshape,
                        softmax_rows)
from .layers import (SignalLike, adaptive_adjacency, as_signal_tensor,
                     pointwise_conv, st_block_forward, temporal_lag_correction)
from .params import ModelParams

log = logging.getLogger(__name__)


def block_adjacencies(params: ModelParams) -> List[Tensor]:
    """The adjacency each of the K blocks uses.

    Under ``M = 1`` every block receives the same tensor object, so its
    gradient accumulates over all blocks.
    """
    config = params.config
    if not config.learns_adjacency:
        shared = constant(params.fixed_adjacency)
        return [shared] * config.K
    realized = [adaptive_adjacency(params.factors(m)) for m in range(config.M)]
    return [realized[config.adjacency_index(k)] for k in range(config.K)]


def realized_adjacencies(params: ModelParams) -> List[np.ndarray]:
    """Snapshot of every distinct adjacency matrix, computed off-tape."""
    config = params.config
    if not config.learns_adjacency:
        return [params.fixed_adjacency.copy()]
    return [adaptive_adjacency(params.factors(m)).data.copy() for m in range(config.M)]


def block_stack(h: Tensor, params: ModelParams) -> Tensor:
    """The K residual blocks between scale-up and reduce, ``[..., N, T, f]`` in and out."""
    adjacencies = block_adjacencies(params)
    for k, dilation in enumerate(params.config.dilation_schedule):
        h = st_block_forward(h, params.block(k), adjacencies[k], dilation)
    return h


def _check_input(x: Tensor, config: ModelConfig) -> None:
    if x.ndim != 4:
        raise DimensionError(f"batched signal must be [B, N, T, C], got {x.shape}")
    _, nodes, steps, channels = x.shape
    if nodes != config.N:
        raise DimensionError(f"signal has N={nodes}, model expects N={config.N}")
    if channels != config.C:
        raise DimensionError(f"signal has C={channels}, model expects C={config.C}")
    if steps < config.ks:
        raise ConfigurationError(f"signal has T={steps}, shorter than kernel size {config.ks}")


def forward_batch(
    x: SignalLike,
    params: ModelParams,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Class probabilities ``[B, num_classes]`` for a batch ``[B, N, T, C]``."""
    config = params.config
    x = as_signal_tensor(x)
    _check_input(x, config)

    h = x
    if config.use_tlc:
        h = temporal_lag_correction(h, params["tlc.weight"], params["tlc.bias"])
    h = pointwise_conv(h, params["scaleup.weight"], params["scaleup.bias"])

    h = block_stack(h, params)
    h = pointwise_conv(h, params["reduce.weight"], params["reduce.bias"])
    batch = x.shape[0]
    pooled = reshape(mean(h, axis=2), (batch, config.N))

    if training and config.dropout_rate > 0.0:
        if rng is None:
            raise ContractError("training-mode forward needs a dropout generator")
        keep = 1.0 - config.dropout_rate
        mask = (rng.random((batch, config.N)) < keep) / keep
        pooled = mul(pooled, constant(mask))

    logits = add(matmul(pooled, params["fc.weight"]), params["fc.bias"])
    return softmax_rows(logits)


def model_forward(
    x: SignalLike,
    params: ModelParams,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Class probabilities ``[num_classes]`` for one signal ``[N, T, C]``."""
    signal = as_signal_tensor(x)
    if signal.ndim != 3:
        raise DimensionError(f"signal must be [N, T, C], got {signal.shape}")
    probs = forward_batch(reshape(signal, (1,) + signal.shape), params, training, rng)
    return reshape(probs, (params.config.num_classes,))


def stack_signals(signals: Sequence[NodeSignalTensor]) -> np.ndarray:
    """Stack equal-length signals into ``[B, N, T, C]``."""
    lengths = {s.T for s in signals}
    if len(lengths) != 1:
        raise DimensionError(f"cannot stack signals of different lengths {sorted(lengths)}")
    return np.stack([s.data for s in signals])


def predict_proba(
    signals: Sequence[NodeSignalTensor], params: ModelParams, batch_size: int = 64
) -> np.ndarray:
    """Inference-mode probabilities ``[len(signals), num_classes]``."""
    out = np.zeros((len(signals), params.config.num_classes))
    for group in group_by_length(range(len(signals)), signals):
        for start in range(0, len(group), batch_size):
            chunk = group[start : start + batch_size]
            batch = stack_signals([signals[i] for i in chunk])
            out[chunk] = forward_batch(batch, params, training=False).data
    return out


def group_by_length(indices, signals: Sequence[NodeSignalTensor]) -> List[List[int]]:
    """Split ``indices`` into runs of equal T, keeping first-seen order."""
    groups = {}
    for i in indices:
        groups.setdefault(signals[i].T, []).append(i)
    return list(groups.values())
