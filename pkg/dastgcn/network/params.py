"""Trainable parameter store, initialization and closed-form parameter count."""

import logging
from collections import OrderedDict
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, ContractError, DimensionError
from ..models import ModelConfig
from ..numerics import Tensor, transpose
from ..rng import substream

log = logging.getLogger(__name__)


class AdjacencyFactors:
    """Source/target node dictionaries ``E_s [N, d]`` and ``E_t [d, N]``.

    With ``target=None`` the factors are tied: ``E_t`` is always the
    transpose of ``E_s``, so the pre-softmax score matrix is symmetric.
    """

    def __init__(self, source: Tensor, target: Optional[Tensor] = None):
        if source.ndim != 2:
            raise DimensionError(f"E_s must be [N, d], got {source.shape}")
        if target is not None and target.shape != source.shape[::-1]:
            raise DimensionError.mismatch("AdjacencyFactors", source.shape, target.shape)
        self.source = source
        self.target = target

    @property
    def tied(self) -> bool:
        return self.target is None

    @property
    def N(self) -> int:
        return self.source.shape[0]

    @property
    def d(self) -> int:
        return self.source.shape[1]

    @property
    def E_s(self) -> Tensor:
        return self.source

    @property
    def E_t(self) -> Tensor:
        return transpose(self.source) if self.target is None else self.target

    def target_array(self) -> np.ndarray:
        return self.source.data.T.copy() if self.target is None else self.target.data.copy()


class BlockParams(NamedTuple):
    filter_weight: Tensor
    filter_bias: Tensor
    gate_weight: Tensor
    gate_bias: Tensor
    gcn_weight: Tensor
    gcn_bias: Tensor


def _scaleup_channels(config: ModelConfig) -> int:
    return 1 if config.use_tlc else config.C


def parameter_shapes(config: ModelConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Every trainable tensor with its shape, in allocation order."""
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    f, ks = config.f, config.ks
    if config.use_tlc:
        shapes["tlc.weight"] = (3, 1)
        shapes["tlc.bias"] = (1,)
    shapes["scaleup.weight"] = (_scaleup_channels(config), f)
    shapes["scaleup.bias"] = (f,)
    for k in range(config.K):
        shapes[f"block{k}.filter.weight"] = (ks, f, f)
        shapes[f"block{k}.filter.bias"] = (f,)
        shapes[f"block{k}.gate.weight"] = (ks, f, f)
        shapes[f"block{k}.gate.bias"] = (f,)
        shapes[f"block{k}.gcn.weight"] = (f, f)
        shapes[f"block{k}.gcn.bias"] = (f,)
    if config.learns_adjacency:
        for m in range(config.M):
            shapes[f"adjacency{m}.source"] = (config.N, config.d)
            if not config.undirected:
                shapes[f"adjacency{m}.target"] = (config.d, config.N)
    shapes["reduce.weight"] = (f, 1)
    shapes["reduce.bias"] = (1,)
    shapes["fc.weight"] = (config.N, config.num_classes)
    shapes["fc.bias"] = (config.num_classes,)
    return shapes


def param_breakdown(config: ModelConfig) -> "OrderedDict[str, int]":
    """Itemized trainable parameter count; independent of T."""
    return OrderedDict(
        (name, int(np.prod(shape))) for name, shape in parameter_shapes(config).items()
    )


def param_count(config: ModelConfig) -> int:
    return sum(param_breakdown(config).values())


def _fan_in(name: str, shape: Tuple[int, ...]) -> int:
    if len(shape) == 3:  # temporal kernel [ks, C_in, C_out]
        return shape[0] * shape[1]
    return shape[0]


def _initial_value(name: str, shape: Tuple[int, ...], config: ModelConfig, seed: int, prefix: str) -> np.ndarray:
    rng = substream(seed, f"{prefix}.{name}")
    if name.endswith(".bias"):
        return np.zeros(shape)
    if name.startswith("adjacency"):
        return rng.normal(0.0, 1.0 / np.sqrt(config.d), size=shape)
    bound = np.sqrt(1.0 / _fan_in(name, shape))
    return rng.uniform(-bound, bound, size=shape)


class ModelParams:
    """Named trainable tensors of one model plus an optional fixed adjacency."""

    def __init__(
        self,
        config: ModelConfig,
        tensors: "OrderedDict[str, Tensor]",
        fixed_adjacency: Optional[np.ndarray] = None,
    ):
        expected = parameter_shapes(config)
        if list(tensors) != list(expected):
            raise ContractError(
                f"parameter names {list(tensors)} do not match config {list(expected)}"
            )
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise DimensionError.mismatch(name, tensors[name].shape, shape)
        if not config.learns_adjacency:
            if fixed_adjacency is None:
                raise ConfigurationError("fixed_correlation mode requires an N x N adjacency")
            fixed_adjacency = np.asarray(fixed_adjacency, dtype=np.float64)
            if fixed_adjacency.shape != (config.N, config.N):
                raise DimensionError.mismatch(
                    "fixed adjacency", fixed_adjacency.shape, (config.N, config.N)
                )
        self.config = config
        self.tensors = tensors
        self.fixed_adjacency = fixed_adjacency

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        return list(self.tensors.items())

    def trainable(self) -> Dict[str, Tensor]:
        return {n: t for n, t in self.tensors.items() if t.requires_grad}

    def count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def block(self, k: int) -> BlockParams:
        p = f"block{k}"
        return BlockParams(
            self.tensors[f"{p}.filter.weight"],
            self.tensors[f"{p}.filter.bias"],
            self.tensors[f"{p}.gate.weight"],
            self.tensors[f"{p}.gate.bias"],
            self.tensors[f"{p}.gcn.weight"],
            self.tensors[f"{p}.gcn.bias"],
        )

    def factor_names(self) -> List[str]:
        return [n for n in self.tensors if n.startswith("adjacency")]

    def factors(self, index: int) -> AdjacencyFactors:
        source = self.tensors[f"adjacency{index}.source"]
        target = self.tensors.get(f"adjacency{index}.target")
        return AdjacencyFactors(source, target)

    def replace(self, name: str, tensor: Tensor) -> "ModelParams":
        """Shallow copy with one tensor swapped (used by gradient checks)."""
        tensors = OrderedDict(self.tensors)
        tensors[name] = tensor
        return ModelParams(self.config, tensors, self.fixed_adjacency)

    def freeze(self, names: List[str]) -> None:
        for name in names:
            self.tensors[name].requires_grad = False
            self.tensors[name].zero_grad()

    def frozen_names(self) -> List[str]:
        return [n for n, t in self.tensors.items() if not t.requires_grad]

    def copy(self) -> "ModelParams":
        tensors = OrderedDict(
            (n, Tensor(t.data.copy(), requires_grad=t.requires_grad, name=n))
            for n, t in self.tensors.items()
        )
        fixed = None if self.fixed_adjacency is None else self.fixed_adjacency.copy()
        return ModelParams(self.config, tensors, fixed)


def init_params(
    config: ModelConfig,
    seed: int,
    fixed_adjacency: Optional[np.ndarray] = None,
    prefix: str = "init",
) -> ModelParams:
    """Fresh parameters; each tensor draws from its own named substream.

    Per-tensor streams mean swapping the adjacency factors for pretrained ones
    leaves every other initial weight unchanged.
    """
    tensors: "OrderedDict[str, Tensor]" = OrderedDict()
    for name, shape in parameter_shapes(config).items():
        value = _initial_value(name, shape, config, seed, prefix)
        tensors[name] = Tensor(value, requires_grad=True, name=name)
    log.debug(f"initialized {len(tensors)} tensors ({param_count(config)} parameters)")
    return ModelParams(config, tensors, fixed_adjacency)
