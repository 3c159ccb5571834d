"""Dataset manifests: JSON index of labeled sample files."""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from config.output import MANIFEST_FILENAME, SAMPLE_FILENAME_TEMPLATE
from utils.file_operations import safe_file_write

from ..errors import ConsistencyError, CorruptFileError, DatasetIOError
from ..models import DatasetManifest, NodeSignalTensor, SampleEntry
from .sample_io import read_sample_array, write_sample

log = logging.getLogger(__name__)


class LabeledSample(NamedTuple):
    signal: NodeSignalTensor
    label: int


class Dataset:
    """Ordered labeled samples plus the manifest metadata they came from.

    Behaves as a sequence of ``(signal, label)`` pairs.
    """

    def __init__(
        self,
        name: str,
        samples: Sequence[LabeledSample],
        tr_seconds: Optional[float] = None,
        subject_ids: Optional[Sequence[str]] = None,
    ):
        self.name = name
        self.samples: List[LabeledSample] = list(samples)
        self.tr_seconds = tr_seconds
        self.subject_ids = (
            list(subject_ids)
            if subject_ids is not None
            else [f"s{i:05d}" for i in range(len(self.samples))]
        )

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[LabeledSample]:
        return iter(self.samples)

    def __getitem__(self, index: int) -> LabeledSample:
        return self.samples[index]

    @property
    def labels(self) -> np.ndarray:
        return np.asarray([s.label for s in self.samples], dtype=np.int64)

    @property
    def signals(self) -> List[NodeSignalTensor]:
        return [s.signal for s in self.samples]

    @property
    def N(self) -> int:
        return self.samples[0].signal.N

    @property
    def C(self) -> int:
        return self.samples[0].signal.C

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "Dataset":
        return Dataset(
            name or self.name,
            [self.samples[i] for i in indices],
            self.tr_seconds,
            [self.subject_ids[i] for i in indices],
        )


def read_manifest(manifest_path: Path) -> DatasetManifest:
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise DatasetIOError(f"manifest not found: {manifest_path}") from e
    except OSError as e:
        raise DatasetIOError(f"cannot read manifest {manifest_path}: {e}") from e
    try:
        return DatasetManifest.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise CorruptFileError(f"{manifest_path}: not valid JSON ({e})") from e
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise CorruptFileError(f"{manifest_path}: invalid manifest at {where}: {first['msg']}") from None


def _load_entry(base: Path, manifest: DatasetManifest, entry: SampleEntry) -> LabeledSample:
    path = base / entry.path
    data = read_sample_array(path)
    n, _, c = data.shape
    if n != manifest.N or c != manifest.C:
        raise ConsistencyError(
            f"{path}: header says N={n}, C={c}; manifest says N={manifest.N}, C={manifest.C}"
        )
    try:
        signal = NodeSignalTensor(data=data.astype(np.float64), tr_seconds=manifest.tr_seconds)
    except ValidationError as e:
        raise CorruptFileError(f"{path}: {e.errors()[0]['msg']}") from None
    return LabeledSample(signal, entry.label)


def load_dataset(manifest_path: Path, threads: int = 1) -> Dataset:
    """Load every sample listed in the manifest, in manifest order.

    Sample paths resolve relative to the manifest's directory. T may differ
    between samples; N and C must match the manifest.
    """
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    entries = manifest.samples
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(lambda e: _load_entry(base, manifest, e), entries))
    else:
        samples = [_load_entry(base, manifest, e) for e in entries]
    log.info(f"Loaded {len(samples)} samples from {manifest_path}")
    return Dataset(
        manifest.name, samples, manifest.tr_seconds, [e.subject_id for e in entries]
    )


def write_dataset(
    samples: Sequence[LabeledSample],
    directory: Path,
    name: str,
    tr_seconds: Optional[float] = None,
    subject_ids: Optional[Sequence[str]] = None,
) -> Path:
    """Write sample files, then the manifest once all of them succeeded."""
    if not samples:
        raise ConsistencyError("cannot write an empty dataset")
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DatasetIOError(f"cannot create {directory}: {e}") from e

    first = samples[0].signal
    entries = []
    for index, (signal, label) in enumerate(samples):
        if signal.N != first.N or signal.C != first.C:
            raise ConsistencyError(
                f"sample {index} is {signal.N}x{signal.C}, dataset is {first.N}x{first.C}"
            )
        filename = SAMPLE_FILENAME_TEMPLATE.format(index=index)
        write_sample(directory / filename, signal.data)
        subject = subject_ids[index] if subject_ids is not None else f"s{index:05d}"
        entries.append(SampleEntry(path=filename, label=int(label), subject_id=subject))

    manifest = DatasetManifest(
        name=name, N=first.N, T=first.T, C=first.C, tr_seconds=tr_seconds, samples=entries
    )
    manifest_path = directory / MANIFEST_FILENAME
    if not safe_file_write(manifest_path, manifest.model_dump_json(indent=2) + "\n"):
        raise DatasetIOError(f"cannot write manifest {manifest_path}")
    log.info(f"Wrote {len(entries)} samples and {manifest_path}")
    return manifest_path
