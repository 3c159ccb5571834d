"""Typed records: configurations, dataset descriptions, metrics and reports."""

from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, ValidationError,
                      field_validator, model_validator)

from config.model import (DEFAULT_BLOCKS, DEFAULT_CHANNELS,
                          DEFAULT_DROPOUT_RATE, DEFAULT_EMBEDDING_DIM,
                          DEFAULT_FILTERS, DEFAULT_KERNEL_SIZE, DEFAULT_NODES,
                          DEFAULT_NUM_CLASSES, doubling_dilations)
from config.synthesis import (DEFAULT_BURN_IN, DEFAULT_EDGE_DENSITY,
                              DEFAULT_EFFECT_SIZE, DEFAULT_NOISE_SIGMA,
                              DEFAULT_PLANTED_EDGES, DEFAULT_SAMPLES_PER_CLASS,
                              DEFAULT_SPECTRAL_RADIUS, DEFAULT_SYNTH_NODES,
                              DEFAULT_SYNTH_TIMEPOINTS, DEFAULT_TR_SECONDS)
from config.training import (DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_FOLDS,
                             DEFAULT_LR_MAX, DEFAULT_SCALING_SIZES,
                             DEFAULT_SEED, DEFAULT_WARMUP_EPOCHS)

from .errors import ConfigurationError, UnknownConfigKeyError

ModelT = TypeVar("ModelT", bound=BaseModel)


def _split_int_list(value: Any) -> Any:
    """Accept ``"1,2,4"`` wherever a list of ints is expected."""
    if isinstance(value, str):
        return [int(part) for part in value.split(",") if part.strip()]
    return value


def _split_str_list(value: Any) -> Any:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


class AdjacencyMode(str, Enum):
    """How each block obtains its graph."""

    ADAPTIVE_DIRECTED = "adaptive_directed"
    ADAPTIVE_UNDIRECTED = "adaptive_undirected"
    FIXED_CORRELATION = "fixed_correlation"


class ModelConfig(BaseModel):
    """Architecture hyperparameters.

    ``M`` defaults to ``K`` (one learned graph per block) and the dilation
    schedule to doubling per block.
    """

    model_config = ConfigDict(extra="forbid")

    N: int = Field(default=DEFAULT_NODES, ge=2)
    C: int = Field(default=DEFAULT_CHANNELS, ge=1)
    K: int = Field(default=DEFAULT_BLOCKS, ge=1)
    f: int = Field(default=DEFAULT_FILTERS, ge=1)
    ks: int = Field(default=DEFAULT_KERNEL_SIZE, ge=1)
    d: int = Field(default=DEFAULT_EMBEDDING_DIM, ge=1)
    M: Optional[int] = None
    dilation_schedule: Optional[List[int]] = None
    dropout_rate: float = Field(default=DEFAULT_DROPOUT_RATE, ge=0.0, lt=1.0)
    use_tlc: bool = True
    adjacency_mode: AdjacencyMode = AdjacencyMode.ADAPTIVE_DIRECTED
    num_classes: int = Field(default=DEFAULT_NUM_CLASSES, ge=2)

    @field_validator("dilation_schedule", mode="before")
    @classmethod
    def _split_dilations(cls, value: Any) -> Any:
        return _split_int_list(value)

    @model_validator(mode="after")
    def _resolve_defaults(self) -> "ModelConfig":
        if self.M is None:
            self.M = self.K
        if self.M not in (1, self.K):
            raise ValueError(f"M must be 1 or K={self.K}, got {self.M}")
        if self.dilation_schedule is None:
            self.dilation_schedule = doubling_dilations(self.K)
        if len(self.dilation_schedule) != self.K:
            raise ValueError(
                f"dilation_schedule has {len(self.dilation_schedule)} entries, K={self.K}"
            )
        if any(rate < 1 for rate in self.dilation_schedule):
            raise ValueError(f"dilations must be >= 1, got {self.dilation_schedule}")
        if self.ks % 2 == 0:
            raise ValueError(f"kernel size ks must be odd, got {self.ks}")
        return self

    @property
    def undirected(self) -> bool:
        return self.adjacency_mode == AdjacencyMode.ADAPTIVE_UNDIRECTED

    @property
    def learns_adjacency(self) -> bool:
        return self.adjacency_mode != AdjacencyMode.FIXED_CORRELATION

    def adjacency_index(self, block: int) -> int:
        """Which factor set block ``block`` reads."""
        return 0 if self.M == 1 else block

    def variant(self, **overrides: Any) -> "ModelConfig":
        data = self.model_dump()
        if "K" in overrides:
            data["dilation_schedule"] = None
        if "M" not in overrides and "K" in overrides:
            data["M"] = None
        data.update(overrides)
        return build_config(ModelConfig, data)


class TrainConfig(BaseModel):
    """Optimization and cross-validation settings."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=DEFAULT_EPOCHS, ge=1)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    lr_max: float = Field(default=DEFAULT_LR_MAX, gt=0.0)
    warmup_epochs: int = Field(default=DEFAULT_WARMUP_EPOCHS, ge=1)
    folds: int = Field(default=DEFAULT_FOLDS, ge=2)
    seed: int = Field(default=DEFAULT_SEED, ge=0)

    @model_validator(mode="after")
    def _check_warmup(self) -> "TrainConfig":
        if not 0 < self.warmup_epochs < self.epochs:
            raise ValueError(
                f"warmup_epochs must satisfy 0 < {self.warmup_epochs} < epochs={self.epochs}"
            )
        return self


class Dynamics(str, Enum):
    STATIC = "static_coupling"
    SWITCHING = "switching_coupling"


class SynthSpec(BaseModel):
    """Planted-structure synthetic dataset description."""

    model_config = ConfigDict(extra="forbid")

    name: str = "synthetic"
    N: int = Field(default=DEFAULT_SYNTH_NODES, ge=2)
    T: int = Field(default=DEFAULT_SYNTH_TIMEPOINTS, ge=2)
    samples_per_class: int = Field(default=DEFAULT_SAMPLES_PER_CLASS, ge=1)
    A_true: Optional[List[List[float]]] = None
    A_base: Optional[List[List[float]]] = None
    effect_size: float = Field(default=DEFAULT_EFFECT_SIZE, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=DEFAULT_NOISE_SIGMA, gt=0.0)
    dynamics: Dynamics = Dynamics.STATIC
    switch_period: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    spectral_radius: float = Field(default=DEFAULT_SPECTRAL_RADIUS, gt=0.0)
    burn_in: int = Field(default=DEFAULT_BURN_IN, ge=0)
    density: float = Field(default=DEFAULT_EDGE_DENSITY, gt=0.0, le=1.0)
    planted_edges: int = Field(default=DEFAULT_PLANTED_EDGES, ge=0)
    tr_seconds: Optional[float] = Field(default=DEFAULT_TR_SECONDS, gt=0.0)

    @model_validator(mode="after")
    def _check_shapes(self) -> "SynthSpec":
        for label, matrix in (("A_true", self.A_true), ("A_base", self.A_base)):
            if matrix is not None and (
                len(matrix) != self.N or any(len(row) != self.N for row in matrix)
            ):
                raise ValueError(f"{label} must be {self.N}x{self.N}")
        if self.dynamics == Dynamics.SWITCHING and self.switch_period is None:
            raise ValueError("switching_coupling needs switch_period")
        return self


class SampleEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    label: int = Field(ge=0, le=1)
    subject_id: str


class DatasetManifest(BaseModel):
    """On-disk dataset description; sample paths are relative to the manifest."""

    model_config = ConfigDict(extra="forbid")

    name: str
    N: int = Field(ge=2)
    T: int = Field(ge=1)
    C: int = Field(default=1, ge=1)
    tr_seconds: Optional[float] = None
    samples: List[SampleEntry] = Field(default_factory=list)


class NodeSignalTensor(BaseModel):
    """One graph signal ``X`` of shape ``[N, T, C]``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray
    tr_seconds: Optional[float] = None

    @field_validator("data", mode="before")
    @classmethod
    def _as_float_array(cls, value: Any) -> np.ndarray:
        array = np.asarray(value, dtype=np.float64)
        if array.ndim == 2:
            array = array[:, :, None]
        if array.ndim != 3:
            raise ValueError(f"signal must be [N, T, C], got shape {array.shape}")
        if array.shape[0] < 2 or array.shape[2] < 1 or array.shape[1] < 1:
            raise ValueError(f"signal needs N >= 2, T >= 1, C >= 1, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("signal contains NaN or Inf")
        return array

    @property
    def N(self) -> int:
        return int(self.data.shape[0])

    @property
    def T(self) -> int:
        return int(self.data.shape[1])

    @property
    def C(self) -> int:
        return int(self.data.shape[2])


class Metrics(BaseModel):
    """Binary classification metrics; class 1 is the positive class.

    A rate whose denominator is zero is ``None`` rather than NaN.
    """

    accuracy: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]
    tp: int
    tn: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, tn: int, fp: int, fn: int) -> "Metrics":
        def ratio(num: int, den: int) -> Optional[float]:
            return num / den if den > 0 else None

        return cls(
            accuracy=ratio(tp + tn, tp + tn + fp + fn),
            sensitivity=ratio(tp, tp + fn),
            specificity=ratio(tn, tn + fp),
            tp=tp,
            tn=tn,
            fp=fp,
            fn=fn,
        )


class EpochRecord(BaseModel):
    epoch: int
    loss: float
    lr: float


class FoldResult(BaseModel):
    fold: int
    status: Literal["ok", "failed"] = "ok"
    message: Optional[str] = None
    metrics: Optional[Metrics] = None
    train_metrics: Optional[Metrics] = None
    loss_curve: List[EpochRecord] = Field(default_factory=list)
    adjacency: List[List[List[float]]] = Field(default_factory=list)


class MetricSummary(BaseModel):
    """Mean and sample standard deviation across completed folds."""

    completed_folds: int
    acc_mean: Optional[float] = None
    acc_sd: Optional[float] = None
    sens_mean: Optional[float] = None
    sens_sd: Optional[float] = None
    spec_mean: Optional[float] = None
    spec_sd: Optional[float] = None


class TrainReport(BaseModel):
    model_name: str
    folds: List[FoldResult]
    summary: MetricSummary
    model_config_snapshot: Optional[Dict[str, Any]] = None
    train_config_snapshot: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(protected_namespaces=())

    def fold_accuracies(self) -> List[Optional[float]]:
        return [f.metrics.accuracy if f.metrics else None for f in self.folds]


class Provenance(BaseModel):
    source_dataset: str
    task: str = "classification"
    seed: int
    config_hash: str


class ScaleSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sizes: List[int] = Field(default_factory=lambda: list(DEFAULT_SCALING_SIZES))
    models: List[str] = Field(default_factory=lambda: ["dast-gcn", "linear"])

    @field_validator("sizes", mode="before")
    @classmethod
    def _split_sizes(cls, value: Any) -> Any:
        return _split_int_list(value)

    @field_validator("models", mode="before")
    @classmethod
    def _split_models(cls, value: Any) -> Any:
        return _split_str_list(value)


class TransferMode(str, Enum):
    FROZEN = "frozen"
    FINETUNE = "finetune"


class TransferSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: TransferMode = TransferMode.FROZEN
    task: str = "classification"


class AblateSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variants: List[str] = Field(
        default_factory=lambda: ["dast-gcn", "tlc", "m1", "undir", "corr"]
    )
    include_linear: bool = True
    grad_check: bool = True

    @field_validator("variants", mode="before")
    @classmethod
    def _split_variants(cls, value: Any) -> Any:
        return _split_str_list(value)


class RunConfig(BaseModel):
    """Every knob of a run, grouped by the dotted namespace used in config files."""

    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    synth: SynthSpec = Field(default_factory=SynthSpec)
    scale: ScaleSettings = Field(default_factory=ScaleSettings)
    transfer: TransferSettings = Field(default_factory=TransferSettings)
    ablate: AblateSettings = Field(default_factory=AblateSettings)


class RunSpec(BaseModel):
    """A fully resolved command invocation, written as run.json."""

    model_config = ConfigDict(extra="forbid")

    command: str
    out: str
    data: Optional[str] = None
    target: Optional[str] = None
    checkpoint: Optional[str] = None
    config: RunConfig = Field(default_factory=RunConfig)


def build_config(model_cls: Type[ModelT], data: Dict[str, Any]) -> ModelT:
    """Validate ``data`` into ``model_cls``, mapping failures to dastgcn errors."""
    try:
        return model_cls.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        unknown = [".".join(str(p) for p in e["loc"]) for e in errors if e["type"] == "extra_forbidden"]
        if unknown:
            raise UnknownConfigKeyError(f"unknown config key(s): {', '.join(unknown)}") from None
        first = errors[0]
        where = ".".join(str(p) for p in first["loc"]) or model_cls.__name__
        raise ConfigurationError(f"invalid {where}: {first['msg']}") from None


class TransferRow(BaseModel):
    arm: Literal["pretrained", "scratch"]
    fold: int
    status: Literal["ok", "failed"]
    metrics: Optional[Metrics] = None


class TransferReport(BaseModel):
    """Paired pretrained-versus-scratch cross-validation on one target dataset."""

    mode: TransferMode
    provenance: Provenance
    rows: List[TransferRow]
    pretrained: MetricSummary
    scratch: MetricSummary
    paired_differences: List[float]
    diff_mean: Optional[float] = None
    diff_sd: Optional[float] = None
    pretrained_mean_ge_scratch: bool
    sd_or_paired_ok: bool
