"""Ablation grid and sample-size scaling harness."""

import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

from config.model import ABLATION_VARIANTS
from config.output import ABLATION_FILENAME, SCALING_FILENAME
from utils.file_operations import write_csv

from ..data.manifest import Dataset
from ..errors import ConfigurationError, ContractError
from ..models import AblateSettings, ModelConfig, TrainConfig, TrainReport
from .baseline import BASELINE_NAME, train_linear_baseline
from .reports import require_written
from .splits import kfold_split, stratified_subsample
from .trainer import train_model

log = logging.getLogger(__name__)

ABLATION_HEADER = ["model", "acc_mean", "acc_sd", "sens_mean", "spec_mean", "grad_check_max_rel_error"]
SCALING_HEADER = ["size", "model", "acc_mean", "acc_sd"]


def ablation_configs(base: ModelConfig, names: Optional[Sequence[str]] = None) -> "OrderedDict[str, ModelConfig]":
    """The named variants of ``base``: full model and its four ablations."""
    names = list(names) if names is not None else list(ABLATION_VARIANTS)
    unknown = [n for n in names if n not in ABLATION_VARIANTS]
    if unknown:
        raise ConfigurationError(
            f"unknown ablation variant(s) {unknown}; choose from {list(ABLATION_VARIANTS)}"
        )
    return OrderedDict((n, base.variant(**ABLATION_VARIANTS[n])) for n in names)


class AblationResult(NamedTuple):
    reports: "OrderedDict[str, TrainReport]"
    grad_errors: Dict[str, Optional[float]]

    def rows(self) -> List[list]:
        rows = []
        for name, report in self.reports.items():
            s = report.summary
            rows.append([name, s.acc_mean, s.acc_sd, s.sens_mean, s.spec_mean, self.grad_errors.get(name)])
        return rows


def run_ablation(
    dataset: Dataset,
    base: ModelConfig,
    train_config: TrainConfig,
    settings: Optional[AblateSettings] = None,
    threads: Optional[int] = None,
) -> AblationResult:
    """Cross-validate every variant (plus the linear baseline) on identical folds."""
    from ..gradcheck_suite import check_variant_gradients, worst_error

    settings = settings or AblateSettings()
    splits = kfold_split(dataset.labels, train_config.folds, train_config.seed)
    reports: "OrderedDict[str, TrainReport]" = OrderedDict()
    grad_errors: Dict[str, Optional[float]] = {}
    for name, config in ablation_configs(base, settings.variants).items():
        if settings.grad_check:
            grad_errors[name] = worst_error(check_variant_gradients(name, train_config.seed))
            log.info(f"{name} gradient check: worst relative error {grad_errors[name]:.3e}")
        reports[name] = train_model(
            dataset, config, train_config, model_name=name, splits=splits, threads=threads
        )
    if settings.include_linear:
        reports[BASELINE_NAME] = train_linear_baseline(dataset, train_config, splits, threads)
        grad_errors[BASELINE_NAME] = None
    return AblationResult(reports, grad_errors)


def write_ablation_table(result: AblationResult, out_dir: Path) -> Path:
    path = Path(out_dir) / ABLATION_FILENAME
    return require_written(write_csv(path, ABLATION_HEADER, result.rows()), path)


class ScalingRow(NamedTuple):
    size: int
    model: str
    acc_mean: Optional[float]
    acc_sd: Optional[float]


def scaling_experiment(
    dataset: Dataset,
    model_configs: Dict[str, Optional[ModelConfig]],
    sizes: Sequence[int],
    train_config: TrainConfig,
    threads: Optional[int] = None,
) -> List[ScalingRow]:
    """Cross-validated accuracy per (samples per class, model).

    A ``None`` config selects the linear baseline. Each size draws its own
    stratified subsample, shared by every model.
    """
    if not sizes:
        raise ContractError("scaling needs at least one size")
    needed = 2 * max(sizes)
    if needed > len(dataset):
        raise ContractError(
            f"largest size {max(sizes)} per class needs {needed} samples, dataset has "
            f"{len(dataset)} (short by {needed - len(dataset)})"
        )
    rows = []
    for size in sizes:
        indices = stratified_subsample(dataset.labels, size, train_config.seed)
        subset = dataset.subset(indices, name=f"{dataset.name}@{size}")
        for name, config in model_configs.items():
            if config is None:
                report = train_linear_baseline(subset, train_config, threads=threads)
            else:
                report = train_model(subset, config, train_config, model_name=name, threads=threads)
            rows.append(ScalingRow(size, name, report.summary.acc_mean, report.summary.acc_sd))
            log.info(f"size {size}, {name}: accuracy {report.summary.acc_mean}")
    return rows


def scaling_models(base: ModelConfig, names: Sequence[str]) -> Dict[str, Optional[ModelConfig]]:
    """Map harness model names to configs; ``linear`` is the baseline."""
    models: Dict[str, Optional[ModelConfig]] = OrderedDict()
    for name in names:
        if name == BASELINE_NAME:
            models[name] = None
        else:
            models[name] = ablation_configs(base, [name])[name]
    return models


def write_scaling_table(rows: Sequence[ScalingRow], out_dir: Path) -> Path:
    path = Path(out_dir) / SCALING_FILENAME
    return require_written(write_csv(path, SCALING_HEADER, [list(r) for r in rows]), path)
