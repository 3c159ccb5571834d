"""Configuration for the spatio-temporal graph model architecture."""

from typing import Dict, List

# Architecture defaults selected for the reference cohort
DEFAULT_NODES = 116
DEFAULT_BLOCKS = 3
DEFAULT_EMBEDDING_DIM = 10
DEFAULT_FILTERS = 10
DEFAULT_KERNEL_SIZE = 3
DEFAULT_DROPOUT_RATE = 0.3
DEFAULT_NUM_CLASSES = 2
DEFAULT_CHANNELS = 1

# Trainable parameter count reported for the reference configuration
REFERENCE_PARAM_COUNT = 11205
PARAM_COUNT_TOLERANCE = 0.30

ADJACENCY_MODES: List[str] = [
    "adaptive_directed",
    "adaptive_undirected",
    "fixed_correlation",
]

# Ablation variants: name -> overrides applied on top of the base config
ABLATION_VARIANTS: Dict[str, Dict[str, object]] = {
    "dast-gcn": {},
    "tlc": {"use_tlc": False},
    "m1": {"M": 1},
    "undir": {"adjacency_mode": "adaptive_undirected"},
    "corr": {"adjacency_mode": "fixed_correlation"},
}


def doubling_dilations(blocks: int) -> List[int]:
    """Dilation per block, doubling from 1."""
    return [2**k for k in range(blocks)]


def get_model_defaults() -> Dict[str, object]:
    """Get default architecture hyperparameters."""
    return {
        "N": DEFAULT_NODES,
        "K": DEFAULT_BLOCKS,
        "f": DEFAULT_FILTERS,
        "ks": DEFAULT_KERNEL_SIZE,
        "d": DEFAULT_EMBEDDING_DIM,
        "C": DEFAULT_CHANNELS,
        "dropout_rate": DEFAULT_DROPOUT_RATE,
        "use_tlc": True,
        "adjacency_mode": ADJACENCY_MODES[0],
        "num_classes": DEFAULT_NUM_CLASSES,
    }
