"""Confusion counts and the metric summary across folds."""

from typing import List, Optional, Protocol, Sequence, Union

import numpy as np

from ..errors import ContractError
from ..models import Metrics, MetricSummary, NodeSignalTensor
from ..network import ModelParams, predict_proba


def confusion_metrics(predicted: Sequence[int], labels: Sequence[int]) -> Metrics:
    """Metrics with class 1 as the positive class."""
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.size == 0:
        raise ContractError("cannot evaluate an empty sample set")
    tp = int(np.sum((predicted == 1) & (labels == 1)))
    tn = int(np.sum((predicted != 1) & (labels != 1)))
    fp = int(np.sum((predicted == 1) & (labels != 1)))
    fn = int(np.sum((predicted != 1) & (labels == 1)))
    return Metrics.from_counts(tp, tn, fp, fn)


class Predictor(Protocol):
    def predict(self, signals: List[NodeSignalTensor]) -> np.ndarray: ...


def evaluate(model: Union[ModelParams, Predictor], samples: Sequence) -> Metrics:
    """Inference-mode metrics on ``(signal, label)`` pairs.

    ``model`` is either DAST-GCN parameters or any object whose ``predict``
    maps signals to ``[B, num_classes]`` probabilities.
    """
    if len(samples) == 0:
        raise ContractError("cannot evaluate an empty sample set")
    signals = [s for s, _ in samples]
    labels = [y for _, y in samples]
    if isinstance(model, ModelParams):
        probs = predict_proba(signals, model)
    else:
        probs = model.predict(signals)
    return confusion_metrics(np.argmax(probs, axis=1), labels)


def _mean_sd(values: List[Optional[float]]):
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    mean = float(np.mean(present))
    sd = float(np.std(present, ddof=1)) if len(present) > 1 else None
    return mean, sd


def summarize(metrics: Sequence[Metrics]) -> MetricSummary:
    """Mean and sample standard deviation (ddof=1) of each rate."""
    acc_mean, acc_sd = _mean_sd([m.accuracy for m in metrics])
    sens_mean, sens_sd = _mean_sd([m.sensitivity for m in metrics])
    spec_mean, spec_sd = _mean_sd([m.specificity for m in metrics])
    return MetricSummary(
        completed_folds=len(metrics),
        acc_mean=acc_mean,
        acc_sd=acc_sd,
        sens_mean=sens_mean,
        sens_sd=sens_sd,
        spec_mean=spec_mean,
        spec_sd=spec_sd,
    )
