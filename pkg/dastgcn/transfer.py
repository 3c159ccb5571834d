"""Export learned graph factors and reuse them to initialize a new model."""

import hashlib
import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from config.output import BUNDLE_FILENAME, TRANSFER_FILENAME
from utils.file_operations import write_csv

from .data.manifest import Dataset
from .errors import CorruptFileError, TransferError
from .models import (ModelConfig, Provenance, TrainConfig, TransferMode,
                     TransferReport, TransferRow)
from .network import (KIND_GRAPH_BUNDLE, ModelParams, init_params,
                      read_container, realized_adjacencies, write_container)
from .numerics import Tensor
from .rng import stream_tag
from .training.metrics import summarize
from .training.reports import require_written, write_adjacencies
from .training.splits import kfold_split
from .training.trainer import Initializer, fit_model, train_model

log = logging.getLogger(__name__)

TRANSFER_HEADER = ["arm", "fold", "status", "accuracy", "sensitivity", "specificity"]


def config_hash(dataset_name: str, model_config: ModelConfig, train_config: TrainConfig) -> str:
    """md5 of the canonical JSON of everything that determines a trained graph."""
    key_data = {
        "dataset": dataset_name,
        "model": model_config.model_dump(mode="json"),
        "train": train_config.model_dump(mode="json"),
    }
    key_string = json.dumps(key_data, sort_keys=True, default=str)
    return hashlib.md5(key_string.encode()).hexdigest()


def make_provenance(
    dataset_name: str, model_config: ModelConfig, train_config: TrainConfig, task: str = "classification"
) -> Provenance:
    return Provenance(
        source_dataset=dataset_name,
        task=task,
        seed=train_config.seed,
        config_hash=config_hash(dataset_name, model_config, train_config),
    )


class GraphBundle(NamedTuple):
    """Adjacency factors of a trained model; ``target`` is None when tied."""

    N: int
    d: int
    factors: List[Tuple[np.ndarray, Optional[np.ndarray]]]
    provenance: Provenance

    @property
    def M(self) -> int:
        return len(self.factors)

    @property
    def tied(self) -> bool:
        return self.factors[0][1] is None


def bundle_from_params(params: ModelParams, provenance: Provenance) -> GraphBundle:
    config = params.config
    if not config.learns_adjacency:
        raise TransferError("a fixed-correlation model has no learned graph to export")
    factors = []
    for m in range(config.M):
        pair = params.factors(m)
        target = None if pair.tied else pair.target.data.copy()
        factors.append((pair.source.data.copy(), target))
    return GraphBundle(config.N, config.d, factors, provenance)


def export_graph(params: ModelParams, provenance: Provenance, out_dir: Path) -> List[Path]:
    """Write the factors as a DGCP bundle plus each realized adjacency as CSV."""
    bundle = bundle_from_params(params, provenance)
    out_dir = Path(out_dir)
    header: Dict[str, Any] = {
        "N": bundle.N,
        "d": bundle.d,
        "M": bundle.M,
        "tied": bundle.tied,
        "provenance": provenance.model_dump(mode="json"),
    }
    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for m, (source, target) in enumerate(bundle.factors):
        tensors[f"factor{m}.source"] = source
        if target is not None:
            tensors[f"factor{m}.target"] = target
    paths = [write_container(out_dir / BUNDLE_FILENAME, KIND_GRAPH_BUNDLE, header, tensors)]
    paths.extend(write_adjacencies(out_dir, realized_adjacencies(params)))
    log.info(f"Exported {bundle.M} graph(s) from {provenance.source_dataset}")
    return paths


def load_graph_bundle(path: Path) -> GraphBundle:
    container = read_container(path, KIND_GRAPH_BUNDLE)
    header = container.header
    try:
        nodes, dim, count = int(header["N"]), int(header["d"]), int(header["M"])
        provenance = Provenance.model_validate(header["provenance"])
        factors = []
        for m in range(count):
            source = container.tensors[f"factor{m}.source"]
            target = container.tensors.get(f"factor{m}.target")
            factors.append((source, target))
    except (KeyError, ValueError) as e:
        raise CorruptFileError(f"{path}: incomplete graph bundle ({e})") from e
    for source, target in factors:
        if source.shape != (nodes, dim) or (target is not None and target.shape != (dim, nodes)):
            raise CorruptFileError(f"{path}: factor shapes disagree with N={nodes}, d={dim}")
    return GraphBundle(nodes, dim, factors, provenance)


def _select_factors(bundle: GraphBundle, config: ModelConfig) -> List[Tuple[np.ndarray, Optional[np.ndarray]]]:
    """Bundle factors arranged for ``config.M`` graphs."""
    if bundle.M == config.M:
        return list(bundle.factors)
    if config.M == 1:
        log.info(f"Loading block-0 factors of a {bundle.M}-graph bundle into a single-graph model")
        return [bundle.factors[0]]
    if bundle.M == 1:
        return [bundle.factors[0]] * config.M
    raise TransferError(f"bundle has M={bundle.M} graphs, model needs M={config.M}")


def init_with_pretrained(
    bundle: GraphBundle,
    config: ModelConfig,
    mode: TransferMode = TransferMode.FROZEN,
    seed: int = 0,
    fold: Optional[int] = None,
) -> ModelParams:
    """Fresh parameters whose adjacency factors are copied from ``bundle``.

    Every other tensor matches ``init_params`` for the same seed and fold.
    """
    if not config.learns_adjacency:
        raise TransferError("cannot load pretrained factors into a fixed-correlation model")
    if bundle.N != config.N:
        raise TransferError(f"bundle has N={bundle.N}, model has N={config.N}")
    if bundle.d != config.d:
        raise TransferError(f"bundle has d={bundle.d}, model has d={config.d}")
    if config.undirected and not bundle.tied:
        raise TransferError("an undirected model needs tied (undirected) bundle factors")

    params = init_params(config, seed, prefix=f"init.{stream_tag(fold)}")
    for m, (source, target) in enumerate(_select_factors(bundle, config)):
        name = f"adjacency{m}.source"
        params.tensors[name] = Tensor(source.copy(), requires_grad=True, name=name)
        if not config.undirected:
            name = f"adjacency{m}.target"
            value = source.T.copy() if target is None else target.copy()
            params.tensors[name] = Tensor(value, requires_grad=True, name=name)
    if mode == TransferMode.FROZEN:
        params.freeze(params.factor_names())
    return params


def pretrained_initializer(bundle: GraphBundle, mode: TransferMode, seed: int) -> Initializer:
    def initialize(config: ModelConfig, fold: Optional[int], fixed: Optional[np.ndarray]) -> ModelParams:
        return init_with_pretrained(bundle, config, mode, seed, fold)

    return initialize


def _paired_flags(pretrained, scratch, differences: List[float]) -> Tuple[bool, bool, Optional[float], Optional[float]]:
    diff_mean = float(np.mean(differences)) if differences else None
    diff_sd = float(np.std(differences, ddof=1)) if len(differences) > 1 else None
    mean_ge = (
        pretrained.acc_mean is not None
        and scratch.acc_mean is not None
        and pretrained.acc_mean >= scratch.acc_mean
    )
    sd_ok = (
        pretrained.acc_sd is not None and scratch.acc_sd is not None and pretrained.acc_sd <= scratch.acc_sd
    ) or (diff_mean is not None and diff_mean >= 0.0)
    return mean_ge, sd_ok, diff_mean, diff_sd


def transfer_experiment(
    source: Optional[Dataset],
    target: Dataset,
    model_config: ModelConfig,
    train_config: TrainConfig,
    mode: TransferMode = TransferMode.FROZEN,
    bundle: Optional[GraphBundle] = None,
    task: str = "classification",
    threads: Optional[int] = None,
) -> Tuple[TransferReport, GraphBundle]:
    """Pretrain a single-graph model on ``source`` then compare target CV arms.

    Both arms share fold splits and every non-factor initial weight, so the
    adjacency initialization is the only difference. A ready ``bundle``
    skips the source stage.
    """
    config = model_config.variant(M=1)
    if bundle is None:
        if source is None:
            raise TransferError("transfer needs a source dataset or a graph bundle")
        if source.N != target.N:
            raise TransferError(f"source has N={source.N}, target has N={target.N}")
        log.info(f"Pretraining on {source.name} ({len(source)} samples)")
        fit = fit_model(source, config, train_config)
        bundle = bundle_from_params(fit.model.params, make_provenance(source.name, config, train_config, task))

    splits = kfold_split(target.labels, train_config.folds, train_config.seed)
    pretrained = train_model(
        target, config, train_config,
        initializer=pretrained_initializer(bundle, mode, train_config.seed),
        model_name="pretrained", splits=splits, threads=threads,
    )
    scratch = train_model(target, config, train_config, model_name="scratch", splits=splits, threads=threads)

    rows = [
        TransferRow(arm=arm, fold=f.fold, status=f.status, metrics=f.metrics)
        for arm, report in (("pretrained", pretrained), ("scratch", scratch))
        for f in report.folds
    ]
    differences = [
        p.metrics.accuracy - s.metrics.accuracy
        for p, s in zip(pretrained.folds, scratch.folds)
        if p.metrics and s.metrics and p.metrics.accuracy is not None and s.metrics.accuracy is not None
    ]
    mean_ge, sd_ok, diff_mean, diff_sd = _paired_flags(pretrained.summary, scratch.summary, differences)
    report = TransferReport(
        mode=mode,
        provenance=bundle.provenance,
        rows=rows,
        pretrained=pretrained.summary,
        scratch=scratch.summary,
        paired_differences=differences,
        diff_mean=diff_mean,
        diff_sd=diff_sd,
        pretrained_mean_ge_scratch=mean_ge,
        sd_or_paired_ok=sd_ok,
    )
    log.info(
        f"Transfer: pretrained {pretrained.summary.acc_mean} vs scratch "
        f"{scratch.summary.acc_mean}, paired difference {diff_mean}"
    )
    return report, bundle


def write_transfer_table(report: TransferReport, out_dir: Path) -> Path:
    rows = []
    for row in report.rows:
        m = row.metrics
        cells = [m.accuracy, m.sensitivity, m.specificity] if m else [None] * 3
        rows.append([row.arm, row.fold, row.status] + cells)
    path = Path(out_dir) / TRANSFER_FILENAME
    return require_written(write_csv(path, TRANSFER_HEADER, rows), path)
