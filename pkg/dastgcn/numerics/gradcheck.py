"""Central finite-difference verification of tape gradients."""

import logging
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import ContractError
from . import ops
from .tensor import Tape, Tensor

log = logging.getLogger(__name__)

TensorFunction = Callable[[Tensor], Tensor]


class GradCheckReport(NamedTuple):
    max_rel_error: float
    worst_index: Optional[Tuple[int, ...]]
    analytic: float
    numeric: float
    coordinates: int
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def passes(self, tolerance: float) -> bool:
        return self.ok and self.max_rel_error < tolerance


def _relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def finite_diff_check(
    f: TensorFunction, x: Tensor, eps: float = 1e-5, seed: int = 0
) -> GradCheckReport:
    """Compare backward() against central differences, coordinate by coordinate.

    Non-scalar outputs of ``f`` are contracted with a fixed random weighting so
    that outputs with a constant sum (softmax rows) still yield an informative
    gradient. ``x`` itself is left untouched.
    """
    if eps <= 0:
        raise ContractError(f"finite_diff_check: eps must be > 0, got {eps}")

    base = x.data.copy()
    probe = Tensor(base.copy(), requires_grad=True, name=x.name)
    weights: Optional[np.ndarray] = None

    with Tape() as tape:
        out = f(probe)
        if out.size != 1:
            weights = np.random.default_rng(seed).standard_normal(out.shape)
            loss = ops.sum(ops.mul(out, weights))
        else:
            loss = ops.sum(out)
        grads = tape.backward(loss)
    analytic = grads.get(probe, np.zeros_like(base))

    def evaluate(values: np.ndarray) -> float:
        result = f(Tensor(values)).data
        if weights is not None:
            return float(np.sum(result * weights))
        return float(np.sum(result))

    worst = (0.0, None, 0.0, 0.0)
    for index in np.ndindex(base.shape):
        shifted = base.copy()
        shifted[index] = base[index] + eps
        upper = evaluate(shifted)
        shifted[index] = base[index] - eps
        lower = evaluate(shifted)
        if not (np.isfinite(upper) and np.isfinite(lower)):
            return GradCheckReport(
                float("inf"), index, float(analytic[index]), float("nan"), base.size,
                failure=f"non-finite output at coordinate {index}",
            )
        numeric = (upper - lower) / (2.0 * eps)
        error = _relative_error(float(analytic[index]), numeric)
        if worst[1] is None or error > worst[0]:
            worst = (error, index, float(analytic[index]), numeric)

    report = GradCheckReport(worst[0], worst[1], worst[2], worst[3], base.size)
    log.debug(f"finite_diff_check: {base.size} coordinates, max rel error {worst[0]:.3e}")
    return report
