"""Dense float64 tensors and the define-by-run tape that differentiates them."""

import logging
from contextvars import ContextVar
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import ContractError

log = logging.getLogger(__name__)

GradRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_active_tape: ContextVar[Optional["Tape"]] = ContextVar(
    "dastgcn_active_tape", default=None
)


class Tensor:
    """Row-major double-precision array with an optional gradient slot.

    Identity semantics: two tensors are the same key in a gradient map only if
    they are the same object.
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "_tape")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        array = np.asarray(data, dtype=np.float64)
        # 0-d stays 0-d
        self.data = array if array.flags.c_contiguous else np.array(array, order="C")
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional["Tape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def tape(self) -> Optional["Tape"]:
        """Tape that recorded this tensor, or None for leaves and constants."""
        return self._tape

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # Operator sugar; the primitives live in ops.py.
    def __add__(self, other):
        from .ops import add

        return add(self, other)

    def __radd__(self, other):
        from .ops import add

        return add(other, self)

    def __sub__(self, other):
        from .ops import sub

        return sub(self, other)

    def __mul__(self, other):
        from .ops import mul

        return mul(self, other)

    def __rmul__(self, other):
        from .ops import mul

        return mul(other, self)

    def __neg__(self):
        from .ops import neg

        return neg(self)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)


class TapeEntry(NamedTuple):
    output: Tensor
    inputs: Tuple[Tensor, ...]
    grad_rule: GradRule
    op: str


class Tape:
    """Ordered record of primitive applications.

    Entries are appended as operations execute, so inputs always precede the
    outputs that consume them. Use as a context manager to make it the active
    tape of the current thread or task.
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []
        self._tokens: List = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_active_tape.set(self))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        _active_tape.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.entries)

    def record(
        self,
        output: Tensor,
        inputs: Sequence[Tensor],
        grad_rule: GradRule,
        op: str,
    ) -> None:
        self.entries.append(TapeEntry(output, tuple(inputs), grad_rule, op))
        output._tape = self

    def backward(self, loss: Tensor) -> Dict[Tensor, np.ndarray]:
        """Propagate d(loss) to every leaf tensor that requires a gradient.

        Gradients are added into ``Tensor.grad`` (callers reset them between
        steps) and the contributions of this call are returned as a map.
        """
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        tensors: Dict[int, Tensor] = {id(loss): loss}
        produced = set()

        for entry in reversed(self.entries):
            produced.add(id(entry.output))
            upstream = grads.get(id(entry.output))
            if upstream is None:
                continue
            local = entry.grad_rule(upstream)
            for tensor, grad in zip(entry.inputs, local):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    tensors[key] = tensor

        result: Dict[Tensor, np.ndarray] = {}
        for key, tensor in tensors.items():
            if key in produced or not tensor.requires_grad:
                continue
            grad = grads[key].reshape(tensor.shape)
            tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
            result[tensor] = grad

        log.debug(f"backward over {len(self.entries)} tape entries, {len(result)} leaves")
        return result


def active_tape() -> Optional[Tape]:
    return _active_tape.get()


def backward(loss: Tensor) -> Dict[Tensor, np.ndarray]:
    """Run the backward pass on the tape that recorded ``loss``."""
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss.tape is None:
        if loss.requires_grad:
            loss.grad = np.ones_like(loss.data) if loss.grad is None else loss.grad + 1.0
            return {loss: np.ones_like(loss.data)}
        raise ContractError("loss was not recorded on a tape")
    return loss.tape.backward(loss)


def zero_grads(tensors) -> None:
    for tensor in tensors:
        tensor.zero_grad()
