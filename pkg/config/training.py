"""Configuration for training, cross-validation and experiment harnesses."""

from typing import Dict, List

DEFAULT_EPOCHS = 200
DEFAULT_BATCH_SIZE = 32
DEFAULT_LR_MAX = 0.001
DEFAULT_WARMUP_EPOCHS = 10
DEFAULT_FOLDS = 5
DEFAULT_SEED = 0

# Adam hyperparameters
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# Probability floor inside the cross-entropy log
PROBABILITY_FLOOR = 1e-12

# Gradient-check tolerances
PRIMITIVE_TOLERANCE = 1e-6
MODEL_TOLERANCE = 1e-4
FINITE_DIFF_EPS = 1e-5

# Samples per class for the scaling harness
DEFAULT_SCALING_SIZES: List[int] = [250, 500, 1000, 2500]


def get_training_defaults() -> Dict[str, object]:
    """Get default training hyperparameters."""
    return {
        "epochs": DEFAULT_EPOCHS,
        "batch_size": DEFAULT_BATCH_SIZE,
        "lr_max": DEFAULT_LR_MAX,
        "warmup_epochs": DEFAULT_WARMUP_EPOCHS,
        "folds": DEFAULT_FOLDS,
        "seed": DEFAULT_SEED,
    }
