"""Dataset files, preprocessing and the synthetic generator."""

from .manifest import (Dataset, LabeledSample, load_dataset, read_manifest,
                       write_dataset)
from .preprocessing import (class_pearson_distance, mean_corr_adjacency,
                            mean_pearson, pearson_matrix,
                            upper_triangle_features, zscore)
from .sample_io import read_sample, write_sample
from .synthesis import SynthResult, synth_generate, synth_samples

__all__ = [
    "Dataset",
    "LabeledSample",
    "load_dataset",
    "read_manifest",
    "write_dataset",
    "read_sample",
    "write_sample",
    "zscore",
    "pearson_matrix",
    "mean_pearson",
    "mean_corr_adjacency",
    "upper_triangle_features",
    "class_pearson_distance",
    "synth_generate",
    "synth_samples",
    "SynthResult",
]
