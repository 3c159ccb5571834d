"""Planted-structure synthetic datasets built from VAR(1) dynamics.

Class 0 evolves as ``x[t+1] = effect_size * A_base x[t] + noise`` and class 1
uses ``A_true`` instead. Under switching coupling class 1 alternates between
``A_base`` and ``A_true`` every ``switch_period`` steps, and class 0 runs the
static average ``(A_base + A_true) / 2``. The two classes then share their
full-scan correlation to first order in the coupling; what remains shrinks
with the period. Both matrices are rescaled to ``spectral_radius`` before the
effect size is applied.

The graph is drawn from the ``synth.graph`` stream of the seed alone, so two
specs with the same seed and N share their planted matrices even when T,
noise or the dataset name differ. Sample noise is keyed on the dataset name.
"""

import logging
from pathlib import Path
from typing import NamedTuple, Optional, Tuple

import numpy as np
from tqdm import tqdm

from config.output import A_BASE_FILENAME, A_TRUE_FILENAME, GROUND_TRUTH_FILENAME
from config.synthesis import EDGE_WEIGHT_RANGE
from utils.cli_common import progress_enabled
from utils.file_operations import write_json, write_matrix_csv

from ..errors import DatasetIOError, SpecError
from ..models import Dynamics, NodeSignalTensor, SynthSpec
from ..rng import substream
from .manifest import Dataset, LabeledSample, write_dataset
from .preprocessing import class_pearson_distance

log = logging.getLogger(__name__)


class SynthResult(NamedTuple):
    dataset: Dataset
    A_true: np.ndarray
    A_base: np.ndarray
    dynamic_radius: float
    pearson_distance: float
    manifest_path: Optional[Path] = None


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix)))) if matrix.size else 0.0


def rescale_to_radius(matrix: np.ndarray, radius: float) -> np.ndarray:
    """Scale ``matrix`` so its spectral radius is ``radius``; zero stays zero."""
    current = spectral_radius(matrix)
    if current <= 0.0:
        return matrix.copy()
    return matrix * (radius / current)


def _random_weights(rng: np.random.Generator, count: int) -> np.ndarray:
    low, high = EDGE_WEIGHT_RANGE
    signs = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    return signs * rng.uniform(low, high, size=count)


def draw_coupling(spec: SynthSpec) -> Tuple[np.ndarray, np.ndarray]:
    """``(A_base, A_true)`` before rescaling.

    Unless supplied, ``A_base`` is a sparse random graph without self-loops
    and ``A_true`` adds ``planted_edges`` new edges to it.
    """
    rng = substream(spec.seed, "synth.graph")
    n = spec.N
    off_diagonal = ~np.eye(n, dtype=bool)

    if spec.A_base is not None:
        base = np.asarray(spec.A_base, dtype=np.float64)
    else:
        mask = (rng.random((n, n)) < spec.density) & off_diagonal
        base = np.zeros((n, n))
        base[mask] = _random_weights(rng, int(mask.sum()))

    if spec.A_true is not None:
        true = np.asarray(spec.A_true, dtype=np.float64)
    else:
        true = base.copy()
        free = np.flatnonzero((base == 0.0) & off_diagonal)
        count = min(spec.planted_edges, free.size)
        chosen = rng.choice(free, size=count, replace=False)
        true.flat[chosen] = _random_weights(rng, count)
    return base, true


def _simulate(
    coupling: Tuple[np.ndarray, ...],
    period: Optional[int],
    spec: SynthSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """One ``[N, T]`` trajectory; ``coupling`` cycles every ``period`` steps."""
    total = spec.burn_in + spec.T
    noise = rng.normal(0.0, spec.noise_sigma, size=(total, spec.N))
    x = np.zeros((total, spec.N))
    x[0] = noise[0]
    for t in range(total - 1):
        # The switching clock starts with the recorded window.
        phase = max(t - spec.burn_in, 0)
        a = coupling[(phase // period) % len(coupling)] if period else coupling[0]
        x[t + 1] = a @ x[t] + noise[t + 1]
    return x[spec.burn_in :].T


def synth_samples(spec: SynthSpec) -> SynthResult:
    """Generate the dataset in memory; labels alternate 0, 1, 0, 1, ..."""
    base, true = draw_coupling(spec)
    base = rescale_to_radius(base, spec.spectral_radius)
    true = rescale_to_radius(true, spec.spectral_radius)
    dyn_base = spec.effect_size * base
    dyn_true = spec.effect_size * true
    switching = spec.dynamics == Dynamics.SWITCHING
    negative = 0.5 * (dyn_base + dyn_true) if switching else dyn_base
    radius = max(spectral_radius(m) for m in (dyn_base, dyn_true, negative))
    if radius >= 1.0:
        raise SpecError(
            f"unstable dynamics: spectral radius {radius:.6f} >= 1 after scaling "
            f"(spectral_radius={spec.spectral_radius}, effect_size={spec.effect_size})"
        )

    if switching:
        positive: Tuple[np.ndarray, ...] = (dyn_base, dyn_true)
        period = spec.switch_period
    else:
        positive = (dyn_true,)
        period = None

    total = 2 * spec.samples_per_class
    samples = []
    for index in tqdm(
        range(total), desc="Generating samples", unit="sample", disable=not progress_enabled()
    ):
        label = index % 2
        rng = substream(spec.seed, f"synth.{spec.name}.sample{index}")
        series = _simulate(positive if label else (negative,), period, spec, rng)
        samples.append(LabeledSample(NodeSignalTensor(data=series, tr_seconds=spec.tr_seconds), label))

    dataset = Dataset(spec.name, samples, spec.tr_seconds)
    distance = class_pearson_distance(dataset.signals, dataset.labels)
    log.info(
        f"Generated {total} samples (N={spec.N}, T={spec.T}), dynamics radius {radius:.4f}, "
        f"class Pearson distance {distance:.4f}"
    )
    return SynthResult(dataset, true, base, radius, distance)


def synth_generate(spec: SynthSpec, out_dir: Path) -> SynthResult:
    """Write the dataset, both planted matrices and a ground-truth record."""
    out_dir = Path(out_dir)
    result = synth_samples(spec)
    manifest_path = write_dataset(result.dataset, out_dir, spec.name, spec.tr_seconds)

    ground_truth = {
        "spec": spec.model_dump(mode="json", exclude={"A_true", "A_base"}),
        "dynamics_spectral_radius": result.dynamic_radius,
        "class_pearson_distance": result.pearson_distance,
        "label_counts": {"0": spec.samples_per_class, "1": spec.samples_per_class},
        "A_true_file": A_TRUE_FILENAME,
        "A_base_file": A_BASE_FILENAME,
        "class0_coupling": (
            "(A_base + A_true) / 2" if spec.dynamics == Dynamics.SWITCHING else "A_base"
        ),
    }
    written = (
        write_matrix_csv(out_dir / A_TRUE_FILENAME, result.A_true)
        and write_matrix_csv(out_dir / A_BASE_FILENAME, result.A_base)
        and write_json(out_dir / GROUND_TRUTH_FILENAME, ground_truth)
    )
    if not written:
        raise DatasetIOError(f"cannot write ground truth into {out_dir}")
    return result._replace(manifest_path=manifest_path)
