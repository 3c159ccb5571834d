"""Tests that the config constants and the typed records agree."""

from config import (ABLATION_VARIANTS, ADJACENCY_MODES, get_model_defaults,
                    get_output_filenames, get_synthesis_defaults,
                    get_training_defaults)
from dastgcn.models import AdjacencyMode, ModelConfig, SynthSpec, TrainConfig


def test_model_defaults_match_record():
    """Test that ModelConfig() carries the configured defaults."""
    config = ModelConfig()

    for key, value in get_model_defaults().items():
        assert getattr(config, key) == value, key
    assert config.M == config.K
    assert config.dilation_schedule == [1, 2, 4]


def test_training_defaults_match_record():
    config = TrainConfig()

    for key, value in get_training_defaults().items():
        assert getattr(config, key) == value, key


def test_synthesis_defaults_match_record():
    spec = SynthSpec()

    for key, value in get_synthesis_defaults().items():
        assert getattr(spec, key) == value, key


def test_adjacency_modes_and_variants_are_valid():
    """Test that every mode string parses and every variant builds a config."""
    assert [m.value for m in AdjacencyMode] == ADJACENCY_MODES
    for name, overrides in ABLATION_VARIANTS.items():
        assert ModelConfig(**overrides).K == 3, name


def test_output_filenames_are_distinct():
    names = list(get_output_filenames().values())

    assert len(names) == len(set(names))
