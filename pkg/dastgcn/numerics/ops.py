"""Differentiable primitives.

Every function computes its forward value with numpy and, when a tape is
active and an input requires a gradient, records the local gradient rule.
Leading batch dimensions broadcast the numpy way; gradients are summed back
onto the original input shapes.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigurationError, ContractError, DimensionError
from .tensor import GradRule, Tensor, active_tape

ArrayLike = Union[Tensor, np.ndarray, float, int]


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def constant(value) -> Tensor:
    """Wrap data as a tensor that never receives a gradient."""
    return Tensor(value, requires_grad=False)


def apply_op(
    data: np.ndarray, inputs: Sequence[Tensor], grad_rule: GradRule, op: str
) -> Tensor:
    """Create the output tensor of a primitive and record it on the active tape."""
    tape = active_tape()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=tracked)
    if tracked:
        tape.record(out, inputs, grad_rule, op)
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError.mismatch(op, a.shape, b.shape) from None


# --- elementwise arithmetic -------------------------------------------------


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def grad_rule(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return apply_op(a.data + b.data, (a, b), grad_rule, "add")


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def grad_rule(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return apply_op(a.data - b.data, (a, b), grad_rule, "sub")


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def grad_rule(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return apply_op(a.data * b.data, (a, b), grad_rule, "mul")


elementwise_mul = mul


def neg(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return apply_op(-a.data, (a,), lambda g: (-g,), "neg")


def square(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return apply_op(a.data * a.data, (a,), lambda g: (2.0 * a.data * g,), "square")


# --- linear algebra ---------------------------------------------------------


def _swap_last(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError.mismatch("matmul", a.shape, b.shape)
    try:
        data = np.matmul(a.data, b.data)
    except ValueError:
        raise DimensionError.mismatch("matmul", a.shape, b.shape) from None

    def grad_rule(g):
        grad_a = unbroadcast(np.matmul(g, _swap_last(b.data)), a.shape)
        grad_b = unbroadcast(np.matmul(_swap_last(a.data), g), b.shape)
        return grad_a, grad_b

    return apply_op(data, (a, b), grad_rule, "matmul")


def transpose(a: ArrayLike) -> Tensor:
    """Swap the last two axes."""
    a = as_tensor(a)
    if a.ndim < 2:
        raise DimensionError(f"transpose needs at least 2 axes, got shape {a.shape}")
    return apply_op(
        _swap_last(a.data).copy(), (a,), lambda g: (_swap_last(g),), "transpose"
    )


def reshape(a: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise DimensionError.mismatch("reshape", a.shape, tuple(shape)) from None
    return apply_op(data, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def concat(tensors: Sequence[ArrayLike], axis: int = -1) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError:
        raise DimensionError(
            f"concat: incompatible shapes {[p.shape for p in parts]}"
        ) from None
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def grad_rule(g):
        return np.split(g, bounds, axis=axis)

    return apply_op(data, tuple(parts), grad_rule, "concat")


# --- reductions -------------------------------------------------------------


def sum(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def grad_rule(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return apply_op(np.asarray(data), (a,), grad_rule, "sum")


def mean(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.size if axis is None else a.shape[axis]
    data = a.data.mean(axis=axis, keepdims=keepdims)

    def grad_rule(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return apply_op(np.asarray(data), (a,), grad_rule, "mean")


# --- activations ------------------------------------------------------------


def tanh(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)
    return apply_op(y, (a,), lambda g: (g * (1.0 - y * y),), "tanh")


def sigmoid(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    # tanh form stays finite for large |x|
    y = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return apply_op(y, (a,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0.0
    return apply_op(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,), "relu")


def softmax_rows(a: ArrayLike) -> Tensor:
    """Softmax along the last axis, shifted by the row maximum."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def grad_rule(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return apply_op(y, (a,), grad_rule, "softmax_rows")


def log_clamped(a: ArrayLike, floor: float = 1e-12) -> Tensor:
    """Natural log of ``max(a, floor)``; no gradient flows through the floor."""
    a = as_tensor(a)
    clipped = a.data > floor
    safe = np.where(clipped, a.data, floor)

    def grad_rule(g):
        return (np.where(clipped, g / safe, 0.0),)

    return apply_op(np.log(safe), (a,), grad_rule, "log")


# --- temporal convolution ---------------------------------------------------


def conv1d_dilated(
    x: ArrayLike, w: ArrayLike, bias: ArrayLike, dilation: int = 1
) -> Tensor:
    """Non-causal "same" convolution along the second-last axis.

    ``x`` is ``[..., T, C_in]``, ``w`` is ``[ks, C_in, C_out]`` and ``bias`` is
    ``[C_out]``. The input is zero padded by ``dilation * (ks - 1) / 2`` on each
    side, so tap ``j`` reads ``t + (j - (ks - 1) / 2) * dilation``.
    """
    x, w, bias = as_tensor(x), as_tensor(w), as_tensor(bias)
    if w.ndim != 3:
        raise DimensionError(f"conv1d_dilated: kernel must be [ks, C_in, C_out], got {w.shape}")
    ks, c_in, c_out = w.shape
    if ks % 2 == 0:
        raise ConfigurationError(f"conv1d_dilated: kernel size must be odd, got {ks}")
    if int(dilation) != dilation or dilation < 1:
        raise ConfigurationError(f"conv1d_dilated: dilation must be >= 1, got {dilation}")
    dilation = int(dilation)
    if x.ndim < 2 or x.shape[-1] != c_in:
        raise DimensionError.mismatch("conv1d_dilated", x.shape, w.shape)
    if bias.shape != (c_out,):
        raise DimensionError.mismatch("conv1d_dilated bias", bias.shape, (c_out,))

    steps = x.shape[-2]
    pad = dilation * (ks - 1) // 2
    widths = [(0, 0)] * (x.ndim - 2) + [(pad, pad), (0, 0)]
    padded = np.pad(x.data, widths)

    out = np.zeros(x.shape[:-1] + (c_out,))
    for tap in range(ks):
        start = tap * dilation
        out += np.matmul(padded[..., start : start + steps, :], w.data[tap])
    out += bias.data

    def grad_rule(g):
        grad_padded = np.zeros_like(padded)
        grad_w = np.zeros_like(w.data)
        lead = list(range(g.ndim - 1))
        for tap in range(ks):
            start = tap * dilation
            window = padded[..., start : start + steps, :]
            grad_padded[..., start : start + steps, :] += np.matmul(g, w.data[tap].T)
            grad_w[tap] = np.tensordot(window, g, axes=(lead, lead))
        grad_x = grad_padded[..., pad : pad + steps, :]
        grad_b = g.reshape(-1, c_out).sum(axis=0)
        return grad_x, grad_w, grad_b

    return apply_op(out, (x, w, bias), grad_rule, "conv1d_dilated")