"""Serialize training reports as JSON and CSV summaries."""

import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from config.output import (ADJACENCY_TEMPLATE, FOLD_ADJACENCY_TEMPLATE,
                           FOLD_LOSSCURVE_TEMPLATE, METRICS_FILENAME,
                           REPORT_FILENAME)
from utils.file_operations import (safe_file_write, write_csv,
                                   write_matrix_csv)

from ..errors import DatasetIOError
from ..models import EpochRecord, Metrics, TrainReport

log = logging.getLogger(__name__)

METRICS_HEADER = ["fold", "status", "accuracy", "sensitivity", "specificity", "tp", "tn", "fp", "fn"]
LOSSCURVE_HEADER = ["epoch", "loss", "lr"]


def require_written(ok: bool, path: Path) -> Path:
    if not ok:
        raise DatasetIOError(f"cannot write {path}")
    return path


def _metric_cells(metrics: Optional[Metrics]) -> List[Any]:
    if metrics is None:
        return [None] * 7
    return [
        metrics.accuracy, metrics.sensitivity, metrics.specificity,
        metrics.tp, metrics.tn, metrics.fp, metrics.fn,
    ]


def metrics_rows(report: TrainReport) -> List[List[Any]]:
    rows = [[f.fold, f.status] + _metric_cells(f.metrics) for f in report.folds]
    s = report.summary
    rows.append(["mean", "summary", s.acc_mean, s.sens_mean, s.spec_mean] + [None] * 4)
    rows.append(["sd", "summary", s.acc_sd, s.sens_sd, s.spec_sd] + [None] * 4)
    return rows


def write_loss_curve(path: Path, curve: Sequence[EpochRecord]) -> Path:
    rows = [[r.epoch, r.loss, r.lr] for r in curve]
    return require_written(write_csv(path, LOSSCURVE_HEADER, rows), path)


def write_adjacencies(
    out_dir: Path, matrices: Sequence[np.ndarray], fold: Optional[int] = None
) -> List[Path]:
    """One CSV per distinct adjacency, rows of full-precision doubles."""
    paths = []
    for index, matrix in enumerate(matrices):
        if fold is None:
            name = ADJACENCY_TEMPLATE.format(index=index)
        else:
            name = FOLD_ADJACENCY_TEMPLATE.format(fold=fold, index=index)
        path = out_dir / name
        paths.append(require_written(write_matrix_csv(path, np.asarray(matrix)), path))
    return paths


def write_train_report(report: TrainReport, out_dir: Path, adjacency_csv: bool = True) -> List[Path]:
    """Write report.json, metrics.csv, per-fold loss curves and adjacencies."""
    out_dir = Path(out_dir)
    report_path = out_dir / REPORT_FILENAME
    paths = [require_written(safe_file_write(report_path, report.model_dump_json(indent=2) + "\n"), report_path)]
    metrics_path = out_dir / METRICS_FILENAME
    paths.append(require_written(write_csv(metrics_path, METRICS_HEADER, metrics_rows(report)), metrics_path))
    for fold in report.folds:
        if fold.loss_curve:
            paths.append(
                write_loss_curve(out_dir / FOLD_LOSSCURVE_TEMPLATE.format(fold=fold.fold), fold.loss_curve)
            )
        if adjacency_csv and fold.adjacency:
            paths.extend(write_adjacencies(out_dir, [np.asarray(a) for a in fold.adjacency], fold.fold))
    log.info(f"Wrote {report.model_name} report with {len(report.folds)} folds to {out_dir}")
    return paths
