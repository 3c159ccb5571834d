"""Adam with bias correction and the cosine warm-up learning-rate schedule."""

import math
from typing import Dict, Mapping, Optional

import numpy as np

from config.training import ADAM_BETA1, ADAM_BETA2, ADAM_EPS

from ..errors import ContractError
from ..models import TrainConfig
from ..numerics import Tensor


class AdamState:
    """First/second moment estimates keyed by parameter name."""

    def __init__(self) -> None:
        self.step = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> AdamState:
    """Update ``params`` in place. Frozen tensors and missing grads are skipped."""
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step
    for name, param in params.items():
        if not param.requires_grad:
            continue
        grad = grads.get(name)
        if grad is None:
            continue
        if grad.shape != param.shape:
            raise ContractError(
                f"adam_step: gradient for {name} has shape {grad.shape}, parameter {param.shape}"
            )
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(param.data)
            state.v[name] = np.zeros_like(param.data)
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        param.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return state


def cosine_warmup_lr(epoch: int, config: TrainConfig) -> float:
    """Linear warm-up to ``lr_max`` over W epochs, then half-cosine decay."""
    if not 0 <= epoch < config.epochs:
        raise ContractError(f"epoch {epoch} outside [0, {config.epochs})")
    warmup = config.warmup_epochs
    if epoch < warmup:
        return config.lr_max * (epoch + 1) / warmup
    progress = (epoch - warmup) / (config.epochs - warmup)
    return config.lr_max * 0.5 * (1.0 + math.cos(math.pi * progress))
