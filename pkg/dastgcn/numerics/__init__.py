"""Dense-tensor numerical core with reverse-mode automatic differentiation."""

from .gradcheck import GradCheckReport, finite_diff_check
from .ops import (add, apply_op, as_tensor, concat, constant, conv1d_dilated,
                  elementwise_mul, log_clamped, matmul, mean, mul, neg, relu,
                  reshape, sigmoid, softmax_rows, square, sub, tanh, transpose,
                  unbroadcast)
from .ops import sum as tensor_sum
from .tensor import Tape, TapeEntry, Tensor, active_tape, backward, zero_grads

__all__ = [
    "Tensor",
    "Tape",
    "TapeEntry",
    "active_tape",
    "backward",
    "zero_grads",
    "apply_op",
    "as_tensor",
    "constant",
    "unbroadcast",
    "add",
    "sub",
    "mul",
    "elementwise_mul",
    "neg",
    "square",
    "matmul",
    "transpose",
    "reshape",
    "concat",
    "tensor_sum",
    "mean",
    "tanh",
    "sigmoid",
    "relu",
    "softmax_rows",
    "log_clamped",
    "conv1d_dilated",
    "finite_diff_check",
    "GradCheckReport",
]
