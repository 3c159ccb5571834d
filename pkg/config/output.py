"""Names of the artifacts written into a run's output directory."""

from typing import Dict

MANIFEST_FILENAME = "manifest.json"
GROUND_TRUTH_FILENAME = "ground_truth.json"
A_TRUE_FILENAME = "A_true.csv"
A_BASE_FILENAME = "A_base.csv"
SAMPLE_FILENAME_TEMPLATE = "sample_{index:05d}.dstg"

RUN_FILENAME = "run.json"
REPORT_FILENAME = "report.json"
METRICS_FILENAME = "metrics.csv"
LOSSCURVE_FILENAME = "losscurve.csv"
FOLD_LOSSCURVE_TEMPLATE = "losscurve_fold{fold}.csv"
ADJACENCY_TEMPLATE = "adjacency_{index}.csv"
FOLD_ADJACENCY_TEMPLATE = "adjacency_fold{fold}_{index}.csv"
CHECKPOINT_FILENAME = "model.dgcp"
BUNDLE_FILENAME = "graph.dgcp"
ABLATION_FILENAME = "ablation.csv"
SCALING_FILENAME = "scaling.csv"
TRANSFER_FILENAME = "transfer.csv"
GRADCHECK_FILENAME = "gradcheck.csv"


def get_output_filenames() -> Dict[str, str]:
    """Get the artifact names used by every command."""
    return {
        "manifest": MANIFEST_FILENAME,
        "ground_truth": GROUND_TRUTH_FILENAME,
        "run": RUN_FILENAME,
        "report": REPORT_FILENAME,
        "metrics": METRICS_FILENAME,
        "losscurve": LOSSCURVE_FILENAME,
        "checkpoint": CHECKPOINT_FILENAME,
        "bundle": BUNDLE_FILENAME,
        "ablation": ABLATION_FILENAME,
        "scaling": SCALING_FILENAME,
        "transfer": TRANSFER_FILENAME,
        "gradcheck": GRADCHECK_FILENAME,
    }
