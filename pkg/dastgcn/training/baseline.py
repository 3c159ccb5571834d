"""Logistic regression on flattened Pearson correlation features."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..data.manifest import Dataset, LabeledSample
from ..data.preprocessing import upper_triangle_features
from ..models import NodeSignalTensor, TrainConfig, TrainReport
from ..numerics import Tensor, add, constant, matmul, softmax_rows
from ..rng import substream, stream_tag
from .losses import cross_entropy_loss
from .splits import Split
from .trainer import FoldModel, cross_validate

log = logging.getLogger(__name__)

BASELINE_NAME = "linear"
NUM_CLASSES = 2


class FeatureCache:
    """Upper-triangle Pearson features, computed once per signal object."""

    def __init__(self) -> None:
        self._features: Dict[int, np.ndarray] = {}

    def __call__(self, signal: NodeSignalTensor) -> np.ndarray:
        key = id(signal)
        feature = self._features.get(key)
        if feature is None:
            feature = self._features[key] = upper_triangle_features(signal)
        return feature

    def matrix(self, signals: Sequence[NodeSignalTensor]) -> np.ndarray:
        return np.stack([self(s) for s in signals])


class LinearModel(FoldModel):
    """Softmax regression whose inputs are standardized with training-fold statistics."""

    def __init__(self, train: Dataset, features: FeatureCache, seed: int, fold: Optional[int]):
        self.features = features
        train_x = features.matrix(train.signals)
        self.center = train_x.mean(axis=0)
        sd = train_x.std(axis=0)
        self.scale = np.where(sd > 0.0, sd, 1.0)

        width = train_x.shape[1]
        bound = np.sqrt(1.0 / width)
        tag = stream_tag(fold)
        rng = substream(seed, f"baseline.{tag}.weight")
        self.weight = Tensor(
            rng.uniform(-bound, bound, size=(width, NUM_CLASSES)), requires_grad=True, name="weight"
        )
        self.bias = Tensor(np.zeros(NUM_CLASSES), requires_grad=True, name="bias")

    def _inputs(self, signals: Sequence[NodeSignalTensor]) -> np.ndarray:
        return (self.features.matrix(signals) - self.center) / self.scale

    def _probs(self, x: np.ndarray) -> Tensor:
        return softmax_rows(add(matmul(constant(x), self.weight), self.bias))

    def trainable(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def batch_loss(self, batch: Sequence[LabeledSample], rng: np.random.Generator) -> Tensor:
        x = self._inputs([s for s, _ in batch])
        return cross_entropy_loss(self._probs(x), [y for _, y in batch])

    def predict(self, signals: List[NodeSignalTensor]) -> np.ndarray:
        return self._probs(self._inputs(signals)).data


def feature_length(nodes: int) -> int:
    return nodes * (nodes - 1) // 2


def train_linear_baseline(
    dataset: Dataset,
    train_config: TrainConfig,
    splits: Optional[List[Split]] = None,
    threads: Optional[int] = None,
) -> TrainReport:
    """Cross-validate the correlation baseline with the DAST-GCN optimizer and schedule."""
    features = FeatureCache()
    # Fill the cache up front so worker threads only read it.
    features.matrix(dataset.signals)
    log.info(f"Linear baseline on {feature_length(dataset.N)} features")

    def build(train: Dataset, fold: int) -> FoldModel:
        return LinearModel(train, features, train_config.seed, fold)

    return cross_validate(dataset, build, train_config, BASELINE_NAME, None, splits, threads)
