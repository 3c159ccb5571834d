"""Optimization, cross-validation, baselines and experiment harnesses."""

from .baseline import LinearModel, feature_length, train_linear_baseline
from .experiments import (AblationResult, ScalingRow, ablation_configs,
                          run_ablation, scaling_experiment, scaling_models,
                          write_ablation_table, write_scaling_table)
from .losses import cross_entropy_loss
from .metrics import confusion_metrics, evaluate, summarize
from .optim import AdamState, adam_step, cosine_warmup_lr
from .reports import write_adjacencies, write_loss_curve, write_train_report
from .splits import kfold_split, stratified_subsample
from .trainer import (FitResult, FoldModel, GraphModel, cross_validate,
                      default_initializer, fit_model, optimize, train_model)

__all__ = [
    "cross_entropy_loss",
    "AdamState",
    "adam_step",
    "cosine_warmup_lr",
    "kfold_split",
    "stratified_subsample",
    "confusion_metrics",
    "evaluate",
    "summarize",
    "FoldModel",
    "GraphModel",
    "FitResult",
    "optimize",
    "default_initializer",
    "fit_model",
    "cross_validate",
    "train_model",
    "LinearModel",
    "feature_length",
    "train_linear_baseline",
    "ablation_configs",
    "run_ablation",
    "AblationResult",
    "scaling_experiment",
    "scaling_models",
    "ScalingRow",
    "write_ablation_table",
    "write_scaling_table",
    "write_train_report",
    "write_loss_curve",
    "write_adjacencies",
]
