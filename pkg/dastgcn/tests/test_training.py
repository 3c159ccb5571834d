"""Tests for losses, optimization, splits, metrics and the training harnesses."""

import csv
import math

import numpy as np
import pytest

from config.output import (FOLD_LOSSCURVE_TEMPLATE, METRICS_FILENAME,
                           REPORT_FILENAME, SCALING_FILENAME)
from dastgcn.errors import ConfigurationError, ContractError, DimensionError
from dastgcn.data import synth_samples
from dastgcn.models import (AblateSettings, Dynamics, Metrics, ModelConfig,
                            SynthSpec, TrainConfig)
from dastgcn.numerics import Tensor, constant, mul, tensor_sum
from dastgcn.training import (AdamState, FoldModel, ablation_configs,
                              adam_step, confusion_metrics, cosine_warmup_lr,
                              cross_entropy_loss, cross_validate, evaluate,
                              feature_length, fit_model, kfold_split,
                              run_ablation, scaling_experiment, scaling_models,
                              stratified_subsample, summarize,
                              train_linear_baseline, train_model,
                              write_scaling_table, write_train_report)


@pytest.fixture
def six_node_model():
    """Matches the six-node synthetic fixture."""
    return ModelConfig(N=6, f=4, d=3, K=2)


def test_cross_entropy_examples():
    """Test the loss on certain, uniform and confident-wrong predictions."""
    assert cross_entropy_loss(Tensor([1.0, 0.0]), 0).item() == pytest.approx(0.0, abs=1e-12)
    assert cross_entropy_loss(Tensor([0.5, 0.5]), 1).item() == pytest.approx(math.log(2))
    assert cross_entropy_loss(Tensor([0.9, 0.1]), 1).item() == pytest.approx(2.302585, abs=1e-6)


def test_cross_entropy_clamps_zero_probability():
    """Test that a zero probability on the label stays finite."""
    loss = cross_entropy_loss(Tensor([1.0, 0.0]), 1).item()

    assert loss == pytest.approx(-math.log(1e-12))


def test_cross_entropy_batch_mean():
    """Test that a batch loss is the mean of the row losses."""
    probs = Tensor([[0.5, 0.5], [0.9, 0.1]])

    loss = cross_entropy_loss(probs, [0, 1]).item()

    assert loss == pytest.approx((math.log(2) - math.log(0.1)) / 2)


def test_cross_entropy_label_errors():
    """Test out-of-range labels and a label count mismatch."""
    with pytest.raises(ContractError):
        cross_entropy_loss(Tensor([0.5, 0.5]), 2)
    with pytest.raises(DimensionError):
        cross_entropy_loss(Tensor([[0.5, 0.5]]), [0, 1])


def test_adam_first_step_magnitude():
    """Test the first bias-corrected step on a scalar."""
    theta = Tensor([0.0], requires_grad=True)

    adam_step({"theta": theta}, {"theta": np.array([1.0])}, AdamState(), lr=0.001)

    assert theta.data[0] == pytest.approx(-0.001, rel=1e-6)


def test_adam_zero_gradient_leaves_params():
    """Test that a zero gradient does not move the parameters."""
    theta = Tensor([0.3, -0.7], requires_grad=True)

    adam_step({"theta": theta}, {"theta": np.zeros(2)}, AdamState(), lr=0.1)

    assert np.array_equal(theta.data, [0.3, -0.7])


def test_adam_odd_symmetry():
    """Test that flipping gradient and parameter signs flips the trajectory."""
    grads = [np.array([0.4, -1.2]), np.array([-0.3, 0.8]), np.array([1.0, 0.1])]
    plus, minus = Tensor([0.5, -0.2], requires_grad=True), Tensor([-0.5, 0.2], requires_grad=True)
    plus_state, minus_state = AdamState(), AdamState()

    for g in grads:
        adam_step({"p": plus}, {"p": g}, plus_state, lr=0.01)
        adam_step({"p": minus}, {"p": -g}, minus_state, lr=0.01)

    assert np.array_equal(plus.data, -minus.data)


def test_adam_skips_frozen_and_rejects_bad_shape():
    """Test the frozen-tensor skip and the shape contract."""
    frozen = Tensor([1.0], requires_grad=False)
    adam_step({"frozen": frozen}, {"frozen": np.array([5.0])}, AdamState(), lr=0.1)
    assert frozen.data[0] == 1.0

    with pytest.raises(ContractError):
        adam_step({"p": Tensor([1.0, 2.0], requires_grad=True)}, {"p": np.ones(3)}, AdamState(), lr=0.1)


def test_cosine_warmup_schedule():
    """Test the warm-up endpoint, the midpoint and the final epoch."""
    config = TrainConfig(epochs=200, warmup_epochs=10, lr_max=0.001)

    assert cosine_warmup_lr(0, config) == pytest.approx(0.0001)
    assert cosine_warmup_lr(9, config) == pytest.approx(0.001)
    assert cosine_warmup_lr(10, config) == pytest.approx(0.001)
    assert cosine_warmup_lr(105, config) == pytest.approx(0.0005)
    assert cosine_warmup_lr(199, config) < 1e-7


def test_cosine_warmup_epoch_range():
    """Test that epochs outside the run are rejected."""
    config = TrainConfig(epochs=20, warmup_epochs=2)

    with pytest.raises(ContractError):
        cosine_warmup_lr(20, config)


def test_train_config_warmup_bounds():
    """Test that warm-up must be shorter than the run."""
    with pytest.raises(ValueError):
        TrainConfig(epochs=5, warmup_epochs=5)


def test_kfold_balanced_folds():
    """Test stratification, disjointness and coverage."""
    labels = np.array([0, 1] * 50)

    splits = kfold_split(labels, folds=5, seed=0)

    assert len(splits) == 5
    tests = np.concatenate([test for _, test in splits])
    assert np.array_equal(np.sort(tests), np.arange(100))
    for train, test in splits:
        assert np.bincount(labels[test]).tolist() == [10, 10]
        assert np.intersect1d(train, test).size == 0
        assert train.size + test.size == 100


def test_kfold_seeded():
    """Test reproducibility and seed sensitivity."""
    labels = np.array([0, 1] * 50)

    same = kfold_split(labels, 5, seed=1), kfold_split(labels, 5, seed=1)
    other = kfold_split(labels, 5, seed=2)

    assert all(np.array_equal(a[1], b[1]) for a, b in zip(*same))
    assert any(not np.array_equal(a[1], b[1]) for a, b in zip(same[0], other))


def test_kfold_uneven_classes():
    """Test fold sizes and class fractions for unequal classes."""
    labels = np.array([0] * 13 + [1] * 8)

    splits = kfold_split(labels, folds=4, seed=0)

    sizes = [test.size for _, test in splits]
    assert max(sizes) - min(sizes) <= 1
    for _, test in splits:
        assert abs(labels[test].mean() - labels.mean()) <= 1.0 / test.size + 1e-12


def test_kfold_too_many_folds():
    """Test that folds beyond the smallest class are rejected."""
    with pytest.raises(ContractError):
        kfold_split([0, 0, 0, 1, 1], folds=3, seed=0)
    with pytest.raises(ContractError):
        kfold_split([0, 1, 0, 1], folds=1, seed=0)


def test_stratified_subsample():
    """Test per-class draws and the shortfall message."""
    labels = np.array([0] * 10 + [1] * 6)

    chosen = stratified_subsample(labels, 5, seed=0)

    assert np.bincount(labels[chosen]).tolist() == [5, 5]
    with pytest.raises(ContractError) as excinfo:
        stratified_subsample(labels, 8, seed=0)
    assert "short by 2" in str(excinfo.value)


def test_confusion_metrics_arithmetic():
    """Test tp=3, fn=1, tn=2, fp=2."""
    labels = [1, 1, 1, 1, 0, 0, 0, 0]
    predicted = [1, 1, 1, 0, 0, 0, 1, 1]

    metrics = confusion_metrics(predicted, labels)

    assert (metrics.tp, metrics.fn, metrics.tn, metrics.fp) == (3, 1, 2, 2)
    assert metrics.accuracy == pytest.approx(0.625)
    assert metrics.sensitivity == pytest.approx(0.75)
    assert metrics.specificity == pytest.approx(0.5)


def test_confusion_metrics_edge_cases():
    """Test perfect, always-positive and single-class predictions."""
    perfect = confusion_metrics([0, 1, 1], [0, 1, 1])
    positive = confusion_metrics([1, 1, 1, 1], [0, 1, 0, 1])
    one_class = confusion_metrics([1, 1], [1, 1])

    assert (perfect.accuracy, perfect.sensitivity, perfect.specificity) == (1.0, 1.0, 1.0)
    assert (positive.sensitivity, positive.specificity) == (1.0, 0.0)
    assert one_class.specificity is None


def test_evaluate_empty_and_predictor():
    """Test the empty-set contract and evaluation through a predictor."""

    class AlwaysPositive:
        def predict(self, signals):
            return np.tile([0.2, 0.8], (len(signals), 1))

    with pytest.raises(ContractError):
        evaluate(AlwaysPositive(), [])

    metrics = evaluate(AlwaysPositive(), [(None, 1), (None, 0)])
    assert (metrics.tp, metrics.fp) == (1, 1)


def test_summarize_uses_sample_sd():
    """Test mean and ddof=1 standard deviation, with one fold giving no sd."""
    folds = [Metrics.from_counts(1, 1, 0, 0), Metrics.from_counts(1, 0, 1, 0)]

    summary = summarize(folds)

    assert summary.acc_mean == pytest.approx(0.75)
    assert summary.acc_sd == pytest.approx(np.std([1.0, 0.5], ddof=1))
    assert summarize(folds[:1]).acc_sd is None


def test_train_model_report_shape(small_dataset, six_node_model, quick_train):
    """Test that a cross-validation run reports every fold."""
    report = train_model(small_dataset, six_node_model, quick_train, threads=1)

    assert report.model_name == "dast-gcn"
    assert [f.fold for f in report.folds] == [0, 1]
    assert all(f.status == "ok" for f in report.folds)
    assert all(len(f.loss_curve) == quick_train.epochs for f in report.folds)
    assert len(report.folds[0].adjacency) == six_node_model.M
    assert report.summary.completed_folds == 2
    assert 0.0 <= report.summary.acc_mean <= 1.0


def test_train_model_is_deterministic(small_dataset, six_node_model, quick_train):
    """Test identical reports for the same seed, whatever the thread count."""
    first = train_model(small_dataset, six_node_model, quick_train, threads=1)
    second = train_model(small_dataset, six_node_model, quick_train, threads=2)

    assert first.model_dump() == second.model_dump()


def test_train_model_node_mismatch(small_dataset, tiny_model, quick_train):
    """Test that the model's N must match the dataset."""
    with pytest.raises(ConfigurationError):
        train_model(small_dataset, tiny_model, quick_train)


def test_fit_model_loss_decreases(small_dataset, six_node_model):
    """Test that training lowers the loss on planted-structure data."""
    config = six_node_model.variant(dropout_rate=0.0)
    train = TrainConfig(epochs=30, warmup_epochs=3, batch_size=8, lr_max=0.01)

    result = fit_model(small_dataset, config, train, show_progress=False)

    assert result.loss_curve[-1].loss < result.loss_curve[0].loss
    assert result.train_metrics.tp + result.train_metrics.fn == 20


def test_fixed_correlation_variant_trains(small_dataset, six_node_model, quick_train):
    """Test the correlation-graph ablation end to end."""
    config = six_node_model.variant(adjacency_mode="fixed_correlation")

    report = train_model(small_dataset, config, quick_train, model_name="corr")

    assert report.summary.completed_folds == 2
    adjacency = np.asarray(report.folds[0].adjacency[0])
    assert np.allclose(adjacency.sum(axis=1), 2.0)


class _DivergingModel(FoldModel):
    """Produces a NaN loss on its first batch."""

    def __init__(self):
        self.weight = Tensor([1.0], requires_grad=True)

    def trainable(self):
        return {"weight": self.weight}

    def batch_loss(self, batch, rng):
        return tensor_sum(mul(self.weight, constant([np.nan])))

    def predict(self, signals):
        return np.tile([0.5, 0.5], (len(signals), 1))


def test_diverged_fold_is_marked_failed(small_dataset, quick_train):
    """Test that a non-finite loss fails its fold without aborting the run."""
    report = cross_validate(small_dataset, lambda train, fold: _DivergingModel(), quick_train, "nan")

    assert [f.status for f in report.folds] == ["failed", "failed"]
    assert "diverged" in report.folds[0].message
    assert report.summary.completed_folds == 0
    assert report.summary.acc_mean is None


def test_linear_baseline(small_dataset, quick_train):
    """Test the correlation baseline on the shared protocol."""
    report = train_linear_baseline(small_dataset, quick_train)

    assert report.model_name == "linear"
    assert report.model_config_snapshot is None
    assert report.summary.completed_folds == 2
    assert feature_length(116) == 6670


def test_write_train_report(tmp_path, small_dataset, six_node_model, quick_train):
    """Test the JSON and CSV files of a report."""
    report = train_model(small_dataset, six_node_model, quick_train)

    write_train_report(report, tmp_path)

    assert (tmp_path / REPORT_FILENAME).exists()
    assert (tmp_path / FOLD_LOSSCURVE_TEMPLATE.format(fold=1)).exists()
    with open(tmp_path / METRICS_FILENAME, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:3] == ["fold", "status", "accuracy"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "mean", "sd"]


def test_ablation_configs():
    """Test the variant overrides and unknown names."""
    configs = ablation_configs(ModelConfig(N=4, f=4, d=3))

    assert list(configs) == ["dast-gcn", "tlc", "m1", "undir", "corr"]
    assert configs["tlc"].use_tlc is False
    assert configs["m1"].M == 1
    assert configs["undir"].undirected
    assert not configs["corr"].learns_adjacency
    with pytest.raises(ConfigurationError):
        ablation_configs(ModelConfig(), ["nope"])


def test_run_ablation_shares_folds(small_dataset, six_node_model, quick_train):
    """Test that a reduced grid reports each variant and the baseline."""
    settings = AblateSettings(variants=["dast-gcn", "m1"], grad_check=False)

    result = run_ablation(small_dataset, six_node_model, quick_train, settings)

    assert list(result.reports) == ["dast-gcn", "m1", "linear"]
    assert [row[0] for row in result.rows()] == ["dast-gcn", "m1", "linear"]
    assert result.grad_errors == {"linear": None}


def test_scaling_experiment(tmp_path, small_dataset, six_node_model, quick_train):
    """Test one row per size and model, and the table header."""
    models = scaling_models(six_node_model, ["dast-gcn", "linear"])

    rows = scaling_experiment(small_dataset, models, [5, 10], quick_train)
    path = write_scaling_table(rows, tmp_path)

    assert [(r.size, r.model) for r in rows] == [
        (5, "dast-gcn"), (5, "linear"), (10, "dast-gcn"), (10, "linear"),
    ]
    assert path.name == SCALING_FILENAME
    assert path.read_text().splitlines()[0] == "size,model,acc_mean,acc_sd"


def test_scaling_experiment_shortfall(small_dataset, six_node_model, quick_train):
    """Test that sizes beyond the dataset are refused."""
    with pytest.raises(ContractError) as excinfo:
        scaling_experiment(small_dataset, {"dast-gcn": six_node_model}, [25], quick_train)

    assert "short by 10" in str(excinfo.value)


@pytest.mark.slow
def test_small_set_overfits(six_node_model, small_dataset):
    """Test that ten samples can be memorized."""
    subset = small_dataset.subset(range(10))
    config = six_node_model.variant(dropout_rate=0.0)
    train = TrainConfig(epochs=300, warmup_epochs=10, batch_size=10, lr_max=0.01)

    result = fit_model(subset, config, train, show_progress=False)

    assert result.train_metrics.accuracy == 1.0


def _switching_dataset(effect_size, samples_per_class=400):
    spec = SynthSpec(
        name=f"switching-{effect_size}", N=16, T=64, samples_per_class=samples_per_class,
        effect_size=effect_size, dynamics=Dynamics.SWITCHING, switch_period=8, seed=11,
    )
    return synth_samples(spec).dataset


@pytest.fixture
def desk_train():
    """Five folds at a learning rate suited to a few hundred samples per class."""
    return TrainConfig(epochs=100, warmup_epochs=10, lr_max=0.005, folds=5)


@pytest.mark.slow
def test_switching_structure_is_learned_and_ordered(desk_train):
    """Test DAST-GCN accuracy and its ordering against _corr and the linear baseline."""
    dataset = _switching_dataset(0.8)
    settings = AblateSettings(variants=["dast-gcn", "corr"], grad_check=False)

    result = run_ablation(dataset, ModelConfig(N=16), desk_train, settings)

    acc = {name: report.summary.acc_mean for name, report in result.reports.items()}
    assert acc["dast-gcn"] >= 0.85
    assert acc["dast-gcn"] >= acc["corr"]
    assert acc["dast-gcn"] >= acc["linear"]


@pytest.mark.slow
def test_zero_effect_stays_at_chance(desk_train):
    """Test that every model is at chance when the classes share their dynamics."""
    dataset = _switching_dataset(0.0)
    settings = AblateSettings(variants=["dast-gcn", "corr"], grad_check=False)

    result = run_ablation(dataset, ModelConfig(N=16), desk_train, settings)

    for name, report in result.reports.items():
        assert 0.45 <= report.summary.acc_mean <= 0.55, name


@pytest.mark.slow
def test_accuracy_does_not_fall_with_more_samples(desk_train):
    """Test the scaling trend from 50 to 200 samples per class."""
    dataset = _switching_dataset(0.8, samples_per_class=200)
    models = scaling_models(ModelConfig(N=16), ["dast-gcn"])

    rows = {r.size: r for r in scaling_experiment(dataset, models, [50, 100, 200], desk_train)}

    small, large = rows[50], rows[200]
    pooled_sd = math.sqrt((small.acc_sd**2 + large.acc_sd**2) / 2)
    assert large.acc_mean >= small.acc_mean - pooled_sd


@pytest.mark.slow
def test_linear_baseline_separates_static_coupling(desk_train):
    """Test the correlation baseline on static planted coupling with a strong effect."""
    spec = SynthSpec(name="static-strong", N=16, T=64, samples_per_class=200, effect_size=1.0, seed=11)
    dataset = synth_samples(spec).dataset

    report = train_linear_baseline(dataset, desk_train)

    assert report.summary.acc_mean > 0.9
