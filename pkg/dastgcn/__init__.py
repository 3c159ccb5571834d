"""Dynamic adaptive spatio-temporal graph convolution for time-series classification."""

from .errors import DastGcnError
from .models import (DatasetManifest, Metrics, ModelConfig, NodeSignalTensor,
                     RunConfig, SynthSpec, TrainConfig, TrainReport)

__version__ = "0.1.0"

__all__ = [
    "DastGcnError",
    "ModelConfig",
    "TrainConfig",
    "SynthSpec",
    "DatasetManifest",
    "NodeSignalTensor",
    "Metrics",
    "TrainReport",
    "RunConfig",
    "__version__",
]
