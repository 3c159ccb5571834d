"""Mini-batch training loop and the stratified cross-validation harness."""

import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from tqdm import tqdm

from utils.cli_common import progress_enabled

from ..data.manifest import Dataset, LabeledSample
from ..data.preprocessing import mean_corr_adjacency
from ..errors import ConfigurationError, ContractError, FoldDivergedError
from ..models import (EpochRecord, FoldResult, Metrics, ModelConfig,
                      NodeSignalTensor, TrainConfig, TrainReport)
from ..network import (ModelParams, forward_batch, group_by_length,
                       init_params, predict_proba, realized_adjacencies,
                       stack_signals)
from ..numerics import Tape, Tensor, add, constant, mul, zero_grads
from ..rng import fold_stream, stream_tag
from ..settings import load_settings
from .losses import cross_entropy_loss
from .metrics import evaluate, summarize
from .optim import AdamState, adam_step, cosine_warmup_lr
from .splits import Split, kfold_split

log = logging.getLogger(__name__)

# (config, fold or None, fixed adjacency) -> initial parameters
Initializer = Callable[[ModelConfig, Optional[int], Optional[np.ndarray]], ModelParams]


class FoldModel(ABC):
    """A classifier the training loop can optimize and evaluate."""

    @abstractmethod
    def trainable(self) -> Dict[str, Tensor]:
        """Tensors updated by Adam, keyed by name."""

    @abstractmethod
    def batch_loss(self, batch: Sequence[LabeledSample], rng: np.random.Generator) -> Tensor:
        """Training-mode mean cross-entropy of ``batch``, recorded on the active tape."""

    @abstractmethod
    def predict(self, signals: List[NodeSignalTensor]) -> np.ndarray:
        """Inference-mode probabilities ``[B, num_classes]``."""

    def adjacency_snapshots(self) -> List[np.ndarray]:
        return []


class GraphModel(FoldModel):
    """DAST-GCN parameters seen through the training-loop interface."""

    def __init__(self, params: ModelParams):
        self.params = params

    def trainable(self) -> Dict[str, Tensor]:
        return self.params.trainable()

    def batch_loss(self, batch: Sequence[LabeledSample], rng: np.random.Generator) -> Tensor:
        signals = [s for s, _ in batch]
        loss: Optional[Tensor] = None
        for group in group_by_length(range(len(batch)), signals):
            probs = forward_batch(
                stack_signals([signals[i] for i in group]), self.params, training=True, rng=rng
            )
            part = cross_entropy_loss(probs, [batch[i].label for i in group])
            if len(group) != len(batch):
                part = mul(part, constant(len(group) / len(batch)))
            loss = part if loss is None else add(loss, part)
        return loss

    def predict(self, signals: List[NodeSignalTensor]) -> np.ndarray:
        return predict_proba(signals, self.params)

    def adjacency_snapshots(self) -> List[np.ndarray]:
        return realized_adjacencies(self.params)


class FitResult(NamedTuple):
    model: FoldModel
    loss_curve: List[EpochRecord]
    train_metrics: Metrics


def optimize(
    model: FoldModel,
    samples: Sequence[LabeledSample],
    train_config: TrainConfig,
    fold: Optional[int] = None,
    show_progress: bool = False,
) -> List[EpochRecord]:
    """Run every epoch of Adam with the cosine warm-up schedule.

    Batches come from a fresh seeded permutation each epoch; the last
    incomplete batch is kept.

    Raises:
        FoldDivergedError: the loss became NaN or infinite
    """
    if len(samples) == 0:
        raise ContractError("cannot train on an empty sample set")
    shuffle_rng = fold_stream(train_config.seed, "shuffle", fold)
    dropout_rng = fold_stream(train_config.seed, "dropout", fold)
    params = model.trainable()
    state = AdamState()
    curve: List[EpochRecord] = []
    batch_size = train_config.batch_size

    epochs = tqdm(
        range(train_config.epochs),
        desc=f"Training {stream_tag(fold)}",
        unit="epoch",
        disable=not (show_progress and progress_enabled()),
    )
    for epoch in epochs:
        lr = cosine_warmup_lr(epoch, train_config)
        order = shuffle_rng.permutation(len(samples))
        total = 0.0
        for start in range(0, len(order), batch_size):
            batch = [samples[i] for i in order[start : start + batch_size]]
            zero_grads(params.values())
            with Tape() as tape:
                loss = model.batch_loss(batch, dropout_rng)
                tape.backward(loss)
            value = loss.item()
            if not np.isfinite(value):
                raise FoldDivergedError(fold if fold is not None else -1, epoch, value)
            adam_step(params, {n: t.grad for n, t in params.items()}, state, lr)
            total += value * len(batch)
        curve.append(EpochRecord(epoch=epoch, loss=total / len(samples), lr=lr))
        log.debug(f"{stream_tag(fold)} epoch {epoch}: loss {curve[-1].loss:.6f} lr {lr:.3e}")
    return curve


def default_initializer(seed: int) -> Initializer:
    def initialize(config: ModelConfig, fold: Optional[int], fixed: Optional[np.ndarray]) -> ModelParams:
        return init_params(config, seed, fixed, prefix=f"init.{stream_tag(fold)}")

    return initialize


def check_dataset(dataset: Dataset, config: ModelConfig) -> None:
    if len(dataset) == 0:
        raise ContractError("dataset is empty")
    if dataset.N != config.N or dataset.C != config.C:
        raise ConfigurationError(
            f"dataset has N={dataset.N}, C={dataset.C}; model expects N={config.N}, C={config.C}"
        )


def build_graph_model(
    train: Dataset,
    model_config: ModelConfig,
    fold: Optional[int],
    initializer: Initializer,
) -> GraphModel:
    """Initial DAST-GCN for one fold; the fixed graph only sees training samples."""
    fixed = None
    if not model_config.learns_adjacency:
        fixed = mean_corr_adjacency(train.signals)
    return GraphModel(initializer(model_config, fold, fixed))


def fit_model(
    dataset: Dataset,
    model_config: ModelConfig,
    train_config: TrainConfig,
    initializer: Optional[Initializer] = None,
    fold: Optional[int] = None,
    show_progress: bool = True,
) -> FitResult:
    """Train one DAST-GCN on every sample of ``dataset``."""
    check_dataset(dataset, model_config)
    initializer = initializer or default_initializer(train_config.seed)
    model = build_graph_model(dataset, model_config, fold, initializer)
    curve = optimize(model, dataset.samples, train_config, fold, show_progress)
    return FitResult(model, curve, evaluate(model, dataset.samples))


# (training subset, fold) -> untrained model
ModelBuilder = Callable[[Dataset, int], FoldModel]


def _run_fold(
    dataset: Dataset, split: Split, fold: int, build: ModelBuilder, train_config: TrainConfig
) -> FoldResult:
    train_idx, test_idx = split
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    model = build(train, fold)
    try:
        curve = optimize(model, train.samples, train_config, fold)
    except FoldDivergedError as e:
        log.warning(f"Fold {fold} failed: {e}")
        return FoldResult(fold=fold, status="failed", message=str(e))
    return FoldResult(
        fold=fold,
        metrics=evaluate(model, test.samples),
        train_metrics=evaluate(model, train.samples),
        loss_curve=curve,
        adjacency=[a.tolist() for a in model.adjacency_snapshots()],
    )


def cross_validate(
    dataset: Dataset,
    build: ModelBuilder,
    train_config: TrainConfig,
    model_name: str,
    model_config: Optional[ModelConfig] = None,
    splits: Optional[List[Split]] = None,
    threads: Optional[int] = None,
) -> TrainReport:
    """Train and evaluate ``build``'s model on every fold.

    Folds are independent and may run on a bounded thread pool; the report
    lists them in fold order regardless of completion order.
    """
    if len(dataset) == 0:
        raise ContractError("dataset is empty")
    splits = splits if splits is not None else kfold_split(
        dataset.labels, train_config.folds, train_config.seed
    )
    if len(splits) != train_config.folds:
        raise ContractError(f"{len(splits)} splits given for {train_config.folds} folds")
    workers = min(threads or load_settings().threads, len(splits))
    log.info(f"Cross-validating {model_name}: {len(splits)} folds, {workers} worker(s)")

    results: Dict[int, FoldResult] = {}
    bar = tqdm(total=len(splits), desc=model_name, unit="fold", disable=not progress_enabled())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_fold, dataset, split, fold, build, train_config): fold
                for fold, split in enumerate(splits)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                bar.update()
    else:
        for fold, split in enumerate(splits):
            results[fold] = _run_fold(dataset, split, fold, build, train_config)
            bar.update()
    bar.close()

    folds = [results[i] for i in range(len(splits))]
    summary = summarize([f.metrics for f in folds if f.status == "ok" and f.metrics])
    accuracy = "NA" if summary.acc_mean is None else f"{summary.acc_mean:.4f}"
    log.info(f"{model_name}: {summary.completed_folds}/{len(folds)} folds completed, accuracy {accuracy}")
    return TrainReport(
        model_name=model_name,
        folds=folds,
        summary=summary,
        model_config_snapshot=model_config.model_dump(mode="json") if model_config else None,
        train_config_snapshot=train_config.model_dump(mode="json"),
    )


def train_model(
    dataset: Dataset,
    model_config: ModelConfig,
    train_config: TrainConfig,
    initializer: Optional[Initializer] = None,
    model_name: str = "dast-gcn",
    splits: Optional[List[Split]] = None,
    threads: Optional[int] = None,
) -> TrainReport:
    """Stratified k-fold cross-validation of DAST-GCN."""
    check_dataset(dataset, model_config)
    initializer = initializer or default_initializer(train_config.seed)

    def build(train: Dataset, fold: int) -> FoldModel:
        return build_graph_model(train, model_config, fold, initializer)

    return cross_validate(dataset, build, train_config, model_name, model_config, splits, threads)
