"""
Exception hierarchy for ebt-rvnn
"""

from typing import Optional


class EBTError(Exception):
    """Base class for every error raised by the package"""


class DimensionError(EBTError, ValueError):
    """Tensor shapes do not line up"""


class ContractError(EBTError, ValueError):
    """A documented precondition was violated"""


class TraceError(ContractError):
    """A merge trace is inconsistent with the sequence it is replayed on"""


class GuardError(ContractError):
    """Input too large for an exhaustive computation"""


class ConfigError(EBTError, ValueError):
    """Invalid or unsatisfiable configuration"""


class VocabError(EBTError, ValueError):
    """Symbol or id outside the vocabulary"""


class ParseError(EBTError, ValueError):
    """Malformed expression or dataset line"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CheckpointError(EBTError):
    """Checkpoint file could not be read back into a model"""


class CheckpointVersionError(CheckpointError):
    """Bad magic bytes, unreadable header or unsupported format version"""


class MissingTensorError(CheckpointError):
    """A parameter expected by the model is absent from the checkpoint"""


class UnexpectedTensorError(CheckpointError):
    """The checkpoint holds a tensor the model does not know"""


class TensorShapeError(CheckpointError):
    """A stored tensor disagrees in shape with the model parameter"""


class VariantMismatchError(CheckpointError):
    """The checkpoint was written for a different model variant"""


class BudgetExceededError(EBTError):
    """Retained activation scalars went over the configured budget"""

    def __init__(self, live_scalars: int, budget: int):
        super().__init__(f"retained {live_scalars} scalars, budget is {budget}")
        self.live_scalars = live_scalars
        self.budget = budget
