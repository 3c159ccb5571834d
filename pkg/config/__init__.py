"""Configuration management for dastgcn."""

from .model import (ABLATION_VARIANTS, ADJACENCY_MODES, REFERENCE_PARAM_COUNT,
                    doubling_dilations, get_model_defaults)
from .output import get_output_filenames
from .synthesis import get_synthesis_defaults
from .training import get_training_defaults

__all__ = [
    "ABLATION_VARIANTS",
    "ADJACENCY_MODES",
    "REFERENCE_PARAM_COUNT",
    "doubling_dilations",
    "get_model_defaults",
    "get_training_defaults",
    "get_synthesis_defaults",
    "get_output_filenames",
]
