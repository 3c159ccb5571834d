"""Shared fixtures for the dastgcn test suites."""

import numpy as np
import pytest

import utils.cli_common as cli_common
from dastgcn.data import synth_samples
from dastgcn.models import ModelConfig, SynthSpec, TrainConfig


@pytest.fixture(autouse=True)
def quiet_progress():
    """Keep tqdm bars out of test output."""
    previous = cli_common._progress_enabled
    cli_common._progress_enabled = False
    yield
    cli_common._progress_enabled = previous


@pytest.fixture
def tiny_model():
    """A 4-node, 4-filter model small enough for finite differences."""
    return ModelConfig(N=4, f=4, d=3, K=3)


@pytest.fixture
def quick_train():
    """A few epochs over two folds."""
    return TrainConfig(epochs=4, warmup_epochs=1, folds=2, batch_size=8, lr_max=0.01)


@pytest.fixture
def small_spec():
    """Planted-structure data with six nodes and twenty samples per class."""
    return SynthSpec(N=6, T=24, samples_per_class=20, seed=3, burn_in=20, planted_edges=4)


@pytest.fixture
def small_dataset(small_spec):
    """In-memory dataset generated from ``small_spec``."""
    return synth_samples(small_spec).dataset


@pytest.fixture
def rng():
    return np.random.default_rng(0)
