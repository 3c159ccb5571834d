"""Tests for sample files, manifests, preprocessing and synthesis."""

import json

import numpy as np
import pytest

from config.output import A_TRUE_FILENAME, GROUND_TRUTH_FILENAME, MANIFEST_FILENAME
from dastgcn.data import (LabeledSample, load_dataset,
                          mean_corr_adjacency, mean_pearson, pearson_matrix,
                          read_sample, synth_generate, synth_samples,
                          upper_triangle_features, write_dataset, write_sample,
                          zscore)
from dastgcn.data.sample_io import decode_sample, encode_sample
from dastgcn.errors import (ConfigurationError, ConsistencyError, ContractError,
                            CorruptFileError, DatasetIOError, SpecError)
from dastgcn.models import Dynamics, NodeSignalTensor, SynthSpec


def _signal(values):
    return NodeSignalTensor(data=np.asarray(values, dtype=np.float64))


@pytest.fixture
def labeled_samples():
    """Four float32-exact samples, two per class."""
    rng = np.random.default_rng(12)
    return [
        LabeledSample(_signal(rng.standard_normal((3, 10, 1)).astype(np.float32)), i % 2)
        for i in range(4)
    ]


def test_sample_bytes_round_trip():
    """Test that the payload survives encoding bit for bit."""
    data = np.arange(24, dtype=np.float32).reshape(2, 4, 3)

    buffer = encode_sample(data)

    assert buffer[:4] == b"DSTG"
    assert len(buffer) == 16 + data.size * 4
    assert np.array_equal(decode_sample(buffer), data)


def test_sample_payload_length_mismatch():
    """Test that a truncated payload is rejected."""
    buffer = encode_sample(np.zeros((2, 4, 1), dtype=np.float32))

    with pytest.raises(CorruptFileError):
        decode_sample(buffer[:-4])


def test_read_sample_bad_magic(tmp_path):
    """Test that a file with the wrong magic is corrupt."""
    path = tmp_path / "bad.dstg"
    path.write_bytes(b"XXXX" + encode_sample(np.zeros((2, 2, 1)))[4:])

    with pytest.raises(CorruptFileError):
        read_sample(path)


def test_read_sample_missing_file_names_path(tmp_path):
    """Test the I/O error for a missing sample."""
    path = tmp_path / "nowhere.dstg"

    with pytest.raises(DatasetIOError) as excinfo:
        read_sample(path)

    assert "nowhere.dstg" in str(excinfo.value)


def test_dataset_round_trip(tmp_path, labeled_samples):
    """Test that write then load reproduces samples, labels and subjects."""
    manifest = write_dataset(labeled_samples, tmp_path, "toy", tr_seconds=0.7)

    dataset = load_dataset(manifest, threads=2)

    assert manifest.name == MANIFEST_FILENAME
    assert dataset.name == "toy"
    assert dataset.tr_seconds == 0.7
    assert list(dataset.labels) == [0, 1, 0, 1]
    assert dataset.subject_ids == ["s00000", "s00001", "s00002", "s00003"]
    for (signal, _), original in zip(dataset, labeled_samples):
        assert np.array_equal(signal.data, original.signal.data)


def test_load_dataset_header_conflict(tmp_path, labeled_samples):
    """Test that a manifest N disagreeing with a header is a consistency error."""
    manifest_path = write_dataset(labeled_samples, tmp_path, "toy")
    manifest = json.loads(manifest_path.read_text())
    manifest["N"] = 4
    manifest_path.write_text(json.dumps(manifest))

    with pytest.raises(ConsistencyError):
        load_dataset(manifest_path)


def test_load_dataset_missing_manifest(tmp_path):
    """Test that a missing manifest is an I/O error."""
    with pytest.raises(DatasetIOError):
        load_dataset(tmp_path / MANIFEST_FILENAME)


def test_load_dataset_rejects_nan(tmp_path):
    """Test that a non-finite payload is reported as corrupt."""
    write_sample(tmp_path / "nan.dstg", np.full((2, 3, 1), np.nan, dtype=np.float32))
    manifest = {
        "name": "nan", "N": 2, "T": 3, "C": 1,
        "samples": [{"path": "nan.dstg", "label": 0, "subject_id": "a"}],
    }
    (tmp_path / MANIFEST_FILENAME).write_text(json.dumps(manifest))

    with pytest.raises(CorruptFileError):
        load_dataset(tmp_path / MANIFEST_FILENAME)


def test_write_dataset_rejects_mixed_nodes(tmp_path):
    """Test that every sample must share N."""
    samples = [LabeledSample(_signal(np.zeros((2, 4))), 0), LabeledSample(_signal(np.zeros((3, 4))), 1)]

    with pytest.raises(ConsistencyError):
        write_dataset(samples, tmp_path, "mixed")


def test_zscore_population_sd():
    """Test z-scoring with the population standard deviation."""
    out = zscore(_signal([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]))

    assert np.allclose(out.data[0, :, 0], [-1.2247, 0.0, 1.2247], atol=1e-4)
    assert np.array_equal(out.data[1, :, 0], [0.0, 0.0, 0.0])


def test_zscore_needs_two_timepoints():
    """Test that a single timepoint cannot be standardized."""
    with pytest.raises(ConfigurationError):
        zscore(_signal([[1.0], [2.0]]))


def test_pearson_matrix_signs_and_diagonal():
    """Test identical, negated and constant series."""
    x = np.array([1.0, 3.0, 2.0, 5.0])
    corr = pearson_matrix(_signal([x, x, -x, np.full(4, 2.0)]))

    assert np.isclose(corr[0, 1], 1.0)
    assert np.isclose(corr[0, 2], -1.0)
    assert corr[0, 3] == 0.0
    assert np.array_equal(np.diag(corr), np.ones(4))
    assert np.allclose(corr, corr.T)


def test_pearson_matches_numpy_and_ignores_zscore():
    """Test against numpy's estimator and invariance under z-scoring."""
    signal = _signal(np.random.default_rng(13).standard_normal((5, 30)))

    corr = pearson_matrix(signal)

    assert np.allclose(corr, np.corrcoef(signal.data[:, :, 0]), atol=1e-12)
    assert np.allclose(pearson_matrix(zscore(signal)), corr, atol=1e-12)


def test_mean_pearson():
    """Test the mean over identical and differing samples."""
    rng = np.random.default_rng(14)
    a, b = _signal(rng.standard_normal((3, 20))), _signal(rng.standard_normal((3, 20)))

    assert np.allclose(mean_pearson([a, a, a]), pearson_matrix(a))
    assert np.allclose(mean_pearson([a, b]), (pearson_matrix(a) + pearson_matrix(b)) / 2)
    with pytest.raises(ContractError):
        mean_pearson([])


def test_mean_corr_adjacency_rows_sum_to_two():
    """Test that the fixed graph is normalized like a learned one."""
    signals = [_signal(np.random.default_rng(i).standard_normal((4, 12))) for i in range(3)]

    assert np.allclose(mean_corr_adjacency(signals).sum(axis=1), 2.0)


def test_upper_triangle_feature_length():
    """Test the N(N-1)/2 feature vector."""
    signal = _signal(np.random.default_rng(15).standard_normal((6, 10)))

    assert upper_triangle_features(signal).shape == (15,)


def test_synth_balanced_and_deterministic(small_spec):
    """Test class balance and reproducibility."""
    first, second = synth_samples(small_spec), synth_samples(small_spec)

    assert np.bincount(first.dataset.labels).tolist() == [20, 20]
    assert first.dataset.N == small_spec.N
    assert first.dataset[0].signal.T == small_spec.T
    for (a, _), (b, _) in zip(first.dataset, second.dataset):
        assert np.array_equal(a.data, b.data)
    assert first.dynamic_radius < 1.0


def test_synth_seed_changes_samples(small_spec):
    """Test that another seed gives other trajectories."""
    other = synth_samples(small_spec.model_copy(update={"seed": 4}))
    base = synth_samples(small_spec)

    assert not np.array_equal(base.dataset[0].signal.data, other.dataset[0].signal.data)


def test_synth_planted_edges_extend_base(small_spec):
    """Test that the positive-class graph adds edges to the base graph."""
    result = synth_samples(small_spec)
    base_edges = result.A_base != 0.0
    true_edges = result.A_true != 0.0

    assert np.all(true_edges[base_edges])
    assert true_edges.sum() == base_edges.sum() + small_spec.planted_edges
    assert not np.any(np.diag(true_edges))


def test_synth_unstable_spec():
    """Test that a radius at or above one is refused with its value."""
    cycle = [[0.0, 1.0], [1.0, 0.0]]
    spec = SynthSpec(N=2, T=8, samples_per_class=2, A_base=cycle, A_true=cycle,
                     spectral_radius=1.2, effect_size=1.0)

    with pytest.raises(SpecError) as excinfo:
        synth_samples(spec)

    assert "1.2" in str(excinfo.value)


def test_synth_zero_effect_has_identical_class_statistics():
    """Test that without coupling both classes are pure noise."""
    spec = SynthSpec(N=4, T=40, samples_per_class=30, effect_size=0.0, seed=1)

    result = synth_samples(spec)

    assert result.dynamic_radius == 0.0
    assert result.pearson_distance < 0.5


def test_synth_switching_dynamics(small_spec):
    """Test that switching coupling generates a stable balanced dataset."""
    spec = small_spec.model_copy(update={"dynamics": Dynamics.SWITCHING, "switch_period": 6})

    result = synth_samples(spec)

    assert len(result.dataset) == 40
    assert np.bincount(result.dataset.labels).tolist() == [20, 20]
    assert result.dynamic_radius < 1.0


def test_synth_generate_writes_ground_truth(tmp_path, small_spec):
    """Test the files written next to the dataset."""
    result = synth_generate(small_spec, tmp_path)

    truth = json.loads((tmp_path / GROUND_TRUTH_FILENAME).read_text())
    assert result.manifest_path == tmp_path / MANIFEST_FILENAME
    assert (tmp_path / A_TRUE_FILENAME).exists()
    assert truth["label_counts"] == {"0": 20, "1": 20}
    assert len(load_dataset(result.manifest_path)) == 40


def test_synth_files_are_reproducible(tmp_path, small_spec):
    """Test that two generations write identical bytes."""
    synth_generate(small_spec, tmp_path / "a")
    synth_generate(small_spec, tmp_path / "b")

    for path in sorted((tmp_path / "a").iterdir()):
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()


def test_synth_switching_contrast_shrinks_with_period():
    """Test that faster switching moves the class means closer together."""
    spec = SynthSpec(
        N=16, T=64, samples_per_class=400, effect_size=0.8,
        dynamics=Dynamics.SWITCHING, switch_period=32, seed=5,
    )

    distances = [
        synth_samples(spec.model_copy(update={"switch_period": period})).pearson_distance
        for period in (32, 16, 8, 4, 2, 1)
    ]

    assert all(a > b for a, b in zip(distances, distances[1:])), distances


def test_synth_switching_ground_truth_names_class0_coupling(tmp_path, small_spec):
    """Test that the ground-truth record states the class-0 coupling."""
    spec = small_spec.model_copy(update={"dynamics": Dynamics.SWITCHING, "switch_period": 4})

    synth_generate(spec, tmp_path / "switching")
    synth_generate(small_spec, tmp_path / "static")

    switching = json.loads((tmp_path / "switching" / GROUND_TRUTH_FILENAME).read_text())
    static = json.loads((tmp_path / "static" / GROUND_TRUTH_FILENAME).read_text())
    assert switching["class0_coupling"] == "(A_base + A_true) / 2"
    assert static["class0_coupling"] == "A_base"
