"""
Utility functions for ebt-rvnn
"""

from .logging import setup_logging, get_logger
from .helpers import format_scalar_count, parse_int_list, get_system_info, ProgressBar

__all__ = [
    "setup_logging",
    "get_logger",
    "format_scalar_count",
    "parse_int_list",
    "get_system_info",
    "ProgressBar",
]
