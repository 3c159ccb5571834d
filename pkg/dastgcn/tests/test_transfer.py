"""Tests for graph export and pretrained initialization."""

import numpy as np
import pytest

from config.output import ADJACENCY_TEMPLATE, BUNDLE_FILENAME
from dastgcn.data import synth_samples
from dastgcn.errors import CorruptFileError, TransferError
from dastgcn.models import (Dynamics, ModelConfig, SynthSpec, TrainConfig,
                            TransferMode)
from dastgcn.network import init_params, save_checkpoint
from dastgcn.numerics import Tape
from dastgcn.training import AdamState, GraphModel, adam_step, optimize
from dastgcn.transfer import (bundle_from_params, config_hash, export_graph,
                              init_with_pretrained, load_graph_bundle,
                              make_provenance, transfer_experiment,
                              write_transfer_table)
from utils.file_operations import read_matrix_csv


@pytest.fixture
def source_config():
    """Three learned graphs on six nodes."""
    return ModelConfig(N=6, f=4, d=3, K=3)


@pytest.fixture
def provenance(source_config, quick_train):
    return make_provenance("source", source_config, quick_train)


@pytest.fixture
def bundle(source_config, provenance):
    """Factors of an independently initialized source model."""
    return bundle_from_params(init_params(source_config, seed=9), provenance)


def _train_steps(params, dataset, steps):
    train = TrainConfig(epochs=steps, warmup_epochs=1, batch_size=len(dataset), lr_max=0.01)
    optimize(GraphModel(params), dataset.samples, train)


def test_frozen_factors_do_not_move(bundle, source_config, small_dataset):
    """Test that frozen factors stay bitwise fixed while other weights train."""
    config = source_config.variant(M=1)
    params = init_with_pretrained(bundle, config, TransferMode.FROZEN, seed=0)
    factors_before = {n: params[n].data.copy() for n in params.factor_names()}
    conv_before = params["block0.filter.weight"].data.copy()

    _train_steps(params, small_dataset, 10)

    for name, value in factors_before.items():
        assert np.array_equal(params[name].data, value)
        assert not params[name].requires_grad
    assert not np.array_equal(params["block0.filter.weight"].data, conv_before)


def test_finetune_factors_move(bundle, source_config, small_dataset):
    """Test that one fine-tuning step updates the pretrained factors."""
    config = source_config.variant(M=1)
    params = init_with_pretrained(bundle, config, TransferMode.FINETUNE, seed=0)
    model = GraphModel(params)
    source_before = params["adjacency0.source"].data.copy()

    with Tape() as tape:
        tape.backward(model.batch_loss(small_dataset.samples[:8], np.random.default_rng(0)))
    trainable = model.trainable()
    adam_step(trainable, {name: t.grad for name, t in trainable.items()}, AdamState(), lr=0.01)

    assert "adjacency0.source" in trainable
    assert not np.array_equal(params["adjacency0.source"].data, source_before)


def test_pretrained_copies_block_zero_factors(bundle, source_config):
    """Test that an M=K bundle loads its first graph into an M=1 model."""
    params = init_with_pretrained(bundle, source_config.variant(M=1), seed=0)

    assert np.array_equal(params["adjacency0.source"].data, bundle.factors[0][0])
    assert np.array_equal(params["adjacency0.target"].data, bundle.factors[0][1])


def test_single_graph_bundle_broadcasts(source_config, provenance):
    """Test that an M=1 bundle fills every graph of an M=K model."""
    single = bundle_from_params(init_params(source_config.variant(M=1), seed=5), provenance)

    params = init_with_pretrained(single, source_config, seed=0)

    for m in range(source_config.K):
        assert np.array_equal(params[f"adjacency{m}.source"].data, single.factors[0][0])


def test_other_weights_match_fresh_init(bundle, source_config):
    """Test that only the adjacency factors differ from a fresh initialization."""
    config = source_config.variant(M=1)
    pretrained = init_with_pretrained(bundle, config, seed=4, fold=1)
    fresh = init_params(config, 4, prefix="init.fold1")

    for name, tensor in fresh.named_tensors():
        if name.startswith("adjacency"):
            continue
        assert np.array_equal(pretrained[name].data, tensor.data)


def test_node_count_mismatch(bundle):
    """Test that the error names both node counts."""
    with pytest.raises(TransferError) as excinfo:
        init_with_pretrained(bundle, ModelConfig(N=8, f=4, d=3, M=1))

    assert "N=6" in str(excinfo.value) and "N=8" in str(excinfo.value)


def test_embedding_and_mode_mismatches(bundle, source_config):
    """Test the d, undirected and fixed-graph refusals."""
    with pytest.raises(TransferError):
        init_with_pretrained(bundle, source_config.variant(d=4))
    with pytest.raises(TransferError):
        init_with_pretrained(bundle, source_config.variant(adjacency_mode="adaptive_undirected"))
    with pytest.raises(TransferError):
        init_with_pretrained(bundle, source_config.variant(adjacency_mode="fixed_correlation"))


def test_fixed_model_has_nothing_to_export(source_config, provenance):
    """Test that a correlation-graph model cannot be exported."""
    config = source_config.variant(adjacency_mode="fixed_correlation")
    params = init_params(config, 0, fixed_adjacency=np.eye(6) + 1.0 / 6.0)

    with pytest.raises(TransferError):
        bundle_from_params(params, provenance)


def test_export_round_trip(tmp_path, source_config, provenance):
    """Test bit-identical factors and valid adjacency CSVs."""
    params = init_params(source_config, seed=2)

    export_graph(params, provenance, tmp_path)
    loaded = load_graph_bundle(tmp_path / BUNDLE_FILENAME)

    assert (loaded.N, loaded.d, loaded.M) == (6, 3, 3)
    assert loaded.provenance == provenance
    for m, (source, target) in enumerate(loaded.factors):
        assert np.array_equal(source, params[f"adjacency{m}.source"].data)
        assert np.array_equal(target, params[f"adjacency{m}.target"].data)
        adjacency = read_matrix_csv(tmp_path / ADJACENCY_TEMPLATE.format(index=m))
        assert np.allclose(adjacency.sum(axis=1), 2.0, atol=1e-9)


def test_export_undirected_is_tied(tmp_path, source_config, provenance):
    """Test that undirected factors are stored without a target."""
    params = init_params(source_config.variant(adjacency_mode="adaptive_undirected"), seed=2)

    export_graph(params, provenance, tmp_path)

    assert load_graph_bundle(tmp_path / BUNDLE_FILENAME).tied


def test_bundle_kind_is_checked(tmp_path, source_config):
    """Test that a parameter checkpoint is not accepted as a bundle."""
    path = save_checkpoint(tmp_path / "model.dgcp", init_params(source_config, seed=0))

    with pytest.raises(CorruptFileError):
        load_graph_bundle(path)


def test_config_hash_tracks_seed(source_config):
    """Test that the provenance hash changes with the training seed."""
    first = config_hash("source", source_config, TrainConfig(seed=0))
    second = config_hash("source", source_config, TrainConfig(seed=1))

    assert first != second
    assert first == config_hash("source", source_config, TrainConfig(seed=0))


def test_transfer_experiment_rows(tmp_path, small_spec, small_dataset, quick_train):
    """Test the paired pretrained and scratch arms on a second dataset."""
    target = synth_samples(small_spec.model_copy(update={"name": "target", "T": 16})).dataset
    config = ModelConfig(N=6, f=4, d=3, K=2)

    report, bundle = transfer_experiment(small_dataset, target, config, quick_train)
    path = write_transfer_table(report, tmp_path)

    assert bundle.M == 1
    assert bundle.provenance.source_dataset == small_dataset.name
    assert len(report.rows) == 2 * quick_train.folds
    assert [r.arm for r in report.rows] == ["pretrained"] * 2 + ["scratch"] * 2
    assert len(report.paired_differences) == quick_train.folds
    assert isinstance(report.pretrained_mean_ge_scratch, bool)
    assert path.read_text().splitlines()[0] == "arm,fold,status,accuracy,sensitivity,specificity"


def test_transfer_needs_matching_nodes(small_dataset, quick_train):
    """Test that source and target must share N."""
    other = synth_samples(SynthSpec(N=5, T=16, samples_per_class=4)).dataset

    with pytest.raises(TransferError):
        transfer_experiment(small_dataset, other, ModelConfig(N=6, f=4, d=3), quick_train)


@pytest.mark.slow
def test_pretrained_graph_helps_short_target():
    """Test frozen transfer from a long source to a short target with the same planted graph."""
    source_spec = SynthSpec(
        name="source", N=16, T=64, samples_per_class=200, effect_size=0.8,
        dynamics=Dynamics.SWITCHING, switch_period=8, seed=11,
    )
    target_spec = source_spec.model_copy(update={"name": "target", "T": 40, "samples_per_class": 50})
    source = synth_samples(source_spec).dataset
    target = synth_samples(target_spec).dataset
    train = TrainConfig(epochs=100, warmup_epochs=10, lr_max=0.005, folds=5)

    report, _ = transfer_experiment(source, target, ModelConfig(N=16), train)

    assert report.mode == TransferMode.FROZEN
    assert report.pretrained_mean_ge_scratch
    assert len(report.paired_differences) == 5
