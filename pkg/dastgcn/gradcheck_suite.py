"""Finite-difference verification of every primitive and of the whole model."""

import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from config.model import ABLATION_VARIANTS
from config.training import (FINITE_DIFF_EPS, MODEL_TOLERANCE,
                             PRIMITIVE_TOLERANCE)

from .data.preprocessing import mean_corr_adjacency
from .models import ModelConfig, NodeSignalTensor, build_config
from .network import (AdjacencyFactors, adaptive_adjacency, gated_tcn_layer,
                      gcn_layer, init_params, model_forward,
                      temporal_lag_correction)
from .numerics import (Tensor, add, concat, constant, conv1d_dilated,
                       finite_diff_check, log_clamped, matmul, mean, mul, neg,
                       relu, reshape, sigmoid, softmax_rows, square, sub, tanh,
                       tensor_sum, transpose)
from .rng import substream
from .training.losses import cross_entropy_loss

log = logging.getLogger(__name__)

# Toy instance every model variant is checked on
TOY_MODEL = {"N": 4, "f": 4, "d": 3, "K": 3}
TOY_TIMEPOINTS = 16


class GradCheckEntry(NamedTuple):
    suite: str
    name: str
    max_rel_error: float
    tolerance: float
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failure is None and self.max_rel_error < self.tolerance


def _check(
    suite: str, name: str, f: Callable[[Tensor], Tensor], x: np.ndarray, tolerance: float, seed: int
) -> GradCheckEntry:
    report = finite_diff_check(f, Tensor(x, name=name), eps=FINITE_DIFF_EPS, seed=seed)
    entry = GradCheckEntry(suite, name, report.max_rel_error, tolerance, report.failure)
    log.debug(f"{suite}/{name}: max rel error {entry.max_rel_error:.3e}")
    return entry


def primitive_cases(seed: int) -> List[Tuple[str, Callable[[Tensor], Tensor], np.ndarray, float]]:
    """``(name, function, input, tolerance)`` for every differentiable op."""
    rng = substream(seed, "gradcheck.primitives")
    a = rng.standard_normal((3, 3))
    b = constant(rng.standard_normal((3, 3)))
    batch = rng.standard_normal((2, 3, 4))
    positive = rng.uniform(0.5, 2.0, size=(3, 4))
    w = constant(rng.standard_normal((3, 4, 5)) * 0.5)
    bias = constant(rng.standard_normal(5))
    signal = rng.standard_normal((2, 9, 4))
    kernel = rng.standard_normal((3, 4, 5)) * 0.5
    factors_t = constant(rng.standard_normal((3, 4)))
    tol = PRIMITIVE_TOLERANCE

    return [
        ("add", lambda x: add(x, b), a, tol),
        ("add_broadcast", lambda x: add(x, constant(np.arange(4.0))), batch, tol),
        ("sub", lambda x: sub(b, x), a, tol),
        ("mul", lambda x: mul(x, b), a, tol),
        ("neg", lambda x: neg(x), a, tol),
        ("square", lambda x: square(x), a, tol),
        ("matmul_left", lambda x: matmul(x, b), a, tol),
        ("matmul_right", lambda x: matmul(b, x), a, tol),
        ("matmul_batched", lambda x: matmul(x, constant(np.ones((4, 2)) * 0.3)), batch, tol),
        ("transpose", lambda x: mul(transpose(x), b), a, tol),
        ("reshape", lambda x: reshape(x, (4, 6)), batch, tol),
        ("concat", lambda x: concat([x, square(x)], axis=-1), batch, tol),
        ("sum_axis", lambda x: tensor_sum(x, axis=1), batch, tol),
        ("mean_axis", lambda x: mean(x, axis=-1), batch, tol),
        ("tanh", lambda x: tanh(x), a, tol),
        ("sigmoid", lambda x: tensor_sum(sigmoid(matmul(b, x))), a, tol),
        ("relu", lambda x: relu(x), a, tol),
        ("softmax_rows", lambda x: softmax_rows(x), batch, tol),
        ("log_clamped", lambda x: log_clamped(x), positive, tol),
        ("conv1d_input", lambda x: conv1d_dilated(x, w, bias, 2), signal, tol),
        ("conv1d_kernel", lambda k: conv1d_dilated(constant(signal), k, bias, 1), kernel, tol),
        ("adaptive_adjacency", lambda s: adaptive_adjacency(AdjacencyFactors(s, factors_t)),
         rng.standard_normal((4, 3)), tol),
        ("cross_entropy", lambda x: cross_entropy_loss(softmax_rows(x), [0, 1, 1]), a, tol),
    ]


def layer_cases(seed: int) -> List[Tuple[str, Callable[[Tensor], Tensor], np.ndarray, float]]:
    """Composed layers, checked at the whole-model tolerance."""
    rng = substream(seed, "gradcheck.layers")
    nodes, steps, f = TOY_MODEL["N"], TOY_TIMEPOINTS, TOY_MODEL["f"]
    x = rng.standard_normal((nodes, steps, f))
    w_f = constant(rng.standard_normal((3, f, f)) * 0.4)
    w_g = constant(rng.standard_normal((3, f, f)) * 0.4)
    adj = constant(np.eye(nodes) + rng.uniform(0.0, 0.5, size=(nodes, nodes)))
    w = constant(rng.standard_normal((f, f)) * 0.4)
    tlc_w = constant(rng.standard_normal((3, 1)))
    tlc_b = constant(np.zeros(1))
    return [
        ("temporal_lag_correction", lambda s: temporal_lag_correction(s, tlc_w, tlc_b),
         rng.standard_normal((nodes, steps, 1)), MODEL_TOLERANCE),
        ("gated_tcn_layer", lambda s: gated_tcn_layer(s, w_f, w_g, 2), x, MODEL_TOLERANCE),
        ("gcn_layer", lambda s: gcn_layer(adj, s, w), x, MODEL_TOLERANCE),
    ]


def check_primitives(seed: int = 0) -> List[GradCheckEntry]:
    entries = [_check("primitive", n, f, x, tol, seed) for n, f, x, tol in primitive_cases(seed)]
    entries += [_check("layer", n, f, x, tol, seed) for n, f, x, tol in layer_cases(seed)]
    return entries


def toy_config(variant: str = "dast-gcn") -> ModelConfig:
    """The small model configuration gradients are checked on."""
    data: Dict[str, object] = dict(TOY_MODEL)
    data.update(ABLATION_VARIANTS[variant])
    return build_config(ModelConfig, data)


def check_model_gradients(
    config: ModelConfig, seed: int = 0, steps: int = TOY_TIMEPOINTS, label: int = 1
) -> List[GradCheckEntry]:
    """Check d(cross-entropy)/d(tensor) for the input and every parameter tensor.

    Dropout is off so the function under test is deterministic.
    """
    rng = substream(seed, "gradcheck.model")
    x = rng.standard_normal((config.N, steps, config.C))
    fixed = None
    if not config.learns_adjacency:
        pool = [NodeSignalTensor(data=rng.standard_normal((config.N, steps, config.C))) for _ in range(4)]
        fixed = mean_corr_adjacency(pool)
    params = init_params(config, seed, fixed, prefix="gradcheck")
    suite = f"model:{config.adjacency_mode.value}"

    def loss_for_input(signal: Tensor) -> Tensor:
        return cross_entropy_loss(model_forward(signal, params), label)

    entries = [_check(suite, "input", loss_for_input, x, MODEL_TOLERANCE, seed)]
    for name, tensor in params.named_tensors():

        def loss_for_param(probe: Tensor, name: str = name) -> Tensor:
            return cross_entropy_loss(model_forward(x, params.replace(name, probe)), label)

        entries.append(_check(suite, name, loss_for_param, tensor.data, MODEL_TOLERANCE, seed))
    return entries


def check_variant_gradients(variant: str, seed: int = 0) -> List[GradCheckEntry]:
    entries = check_model_gradients(toy_config(variant), seed)
    return [e._replace(suite=f"model:{variant}") for e in entries]


def run_gradcheck_suite(seed: int = 0) -> List[GradCheckEntry]:
    """Primitives, composed layers, then the full model under every ablation variant."""
    entries = check_primitives(seed)
    for variant in ABLATION_VARIANTS:
        entries.extend(check_variant_gradients(variant, seed))
    worst = max(entries, key=lambda e: e.max_rel_error)
    log.info(
        f"Gradient suite: {len(entries)} checks, worst relative error "
        f"{worst.max_rel_error:.3e} ({worst.suite}/{worst.name})"
    )
    return entries


def worst_error(entries: List[GradCheckEntry]) -> float:
    return max((e.max_rel_error for e in entries), default=0.0)
