"""Time-course normalization and Pearson connectivity."""

from typing import Sequence

import numpy as np

from ..errors import ConfigurationError, ContractError
from ..models import NodeSignalTensor
from ..network.layers import fixed_correlation_adjacency

# Series with a standard deviation at or below this are treated as constant
CONSTANT_SERIES_TOL = 1e-12


def _require_steps(x: NodeSignalTensor, op: str) -> None:
    if x.T < 2:
        raise ConfigurationError(f"{op} needs T >= 2, got T={x.T}")


def zscore(x: NodeSignalTensor) -> NodeSignalTensor:
    """Standardize each node/channel series over time (population sd).

    A constant series maps to zeros.
    """
    _require_steps(x, "zscore")
    centered = x.data - x.data.mean(axis=1, keepdims=True)
    sd = x.data.std(axis=1, keepdims=True)
    safe = np.where(sd > CONSTANT_SERIES_TOL, sd, 1.0)
    scaled = np.where(sd > CONSTANT_SERIES_TOL, centered / safe, 0.0)
    return NodeSignalTensor(data=scaled, tr_seconds=x.tr_seconds)


def pearson_matrix(x: NodeSignalTensor) -> np.ndarray:
    """``N x N`` correlation of the first channel's node time courses.

    Pairs involving a constant series are 0; the diagonal is always 1.
    """
    _require_steps(x, "pearson_matrix")
    series = x.data[:, :, 0]
    centered = series - series.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("it,it->i", centered, centered))
    live = norms > CONSTANT_SERIES_TOL * np.sqrt(x.T)
    unit = np.zeros_like(centered)
    unit[live] = centered[live] / norms[live, None]
    corr = np.clip(unit @ unit.T, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def mean_pearson(signals: Sequence[NodeSignalTensor]) -> np.ndarray:
    if not signals:
        raise ContractError("mean correlation needs at least one sample")
    return np.mean([pearson_matrix(s) for s in signals], axis=0)


def mean_corr_adjacency(signals: Sequence[NodeSignalTensor]) -> np.ndarray:
    """Mean training-set Pearson matrix, normalized like a learned adjacency."""
    return fixed_correlation_adjacency(mean_pearson(signals))


def upper_triangle_features(x: NodeSignalTensor) -> np.ndarray:
    """Strict upper triangle of the Pearson matrix, length ``N(N-1)/2``."""
    rows, cols = np.triu_indices(x.N, k=1)
    return pearson_matrix(x)[rows, cols]


def class_pearson_distance(signals: Sequence[NodeSignalTensor], labels: Sequence[int]) -> float:
    """Frobenius distance between the class-0 and class-1 mean Pearson matrices."""
    labels = np.asarray(labels)
    by_class = []
    for cls in (0, 1):
        members = [s for s, y in zip(signals, labels) if y == cls]
        if not members:
            raise ContractError(f"no samples of class {cls}")
        by_class.append(mean_pearson(members))
    return float(np.linalg.norm(by_class[0] - by_class[1]))
