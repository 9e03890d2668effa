"""
ebt-rvnn - Efficient Beam Tree Recursive Neural Networks with parent attention
"""

try:
    from ._version import version as __version__
except ImportError:
    __version__ = "0.3.0"

__description__ = "Efficient beam tree recursive neural networks, ListOps harness and memory profiler"

from .config.settings import Config
from .core.models import TreeClassifier, VARIANTS
from .core.trainer import Trainer

__all__ = [
    "Config",
    "TreeClassifier",
    "Trainer",
    "VARIANTS",
    "__version__",
]
