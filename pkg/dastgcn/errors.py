"""Exception hierarchy shared by every dastgcn module."""

from typing import Tuple

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


class DastGcnError(Exception):
    """Base class for contract and configuration failures."""

    exit_code: int = EXIT_FAILURE


class DimensionError(DastGcnError):
    """Tensor shapes do not fit together."""

    @classmethod
    def mismatch(
        cls, op: str, left: Tuple[int, ...], right: Tuple[int, ...]
    ) -> "DimensionError":
        return cls(f"{op}: incompatible shapes {tuple(left)} and {tuple(right)}")


class ConfigurationError(DastGcnError):
    """A configuration value is outside its valid range."""


class UnknownConfigKeyError(ConfigurationError):
    """A run configuration names a key that does not exist."""

    exit_code = EXIT_USAGE


class ContractError(DastGcnError):
    """A caller violated an operation precondition."""


class CorruptFileError(DastGcnError):
    """A binary file does not carry the expected layout."""


class ConsistencyError(DastGcnError):
    """Two sources of truth (header vs manifest, bundle vs config) disagree."""


class DatasetIOError(DastGcnError, OSError):
    """A dataset file could not be read or written."""


class SpecError(DastGcnError):
    """A synthetic dataset specification cannot be generated."""


class TransferError(DastGcnError):
    """A graph bundle cannot be loaded into the requested model."""


class FoldDivergedError(DastGcnError):
    """Training produced a non-finite loss."""

    def __init__(self, fold: int, epoch: int, loss: float):
        super().__init__(f"fold {fold} diverged at epoch {epoch} (loss={loss})")
        self.fold = fold
        self.epoch = epoch
        self.loss = loss


class GradientCheckError(DastGcnError):
    """A finite-difference check exceeded its tolerance."""


class UsageError(DastGcnError):
    """A command was invoked without a required input."""

    exit_code = EXIT_USAGE
