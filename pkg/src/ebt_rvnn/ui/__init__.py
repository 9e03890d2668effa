"""
Terminal report components for ebt-rvnn
"""

from .report import ReportPrinter, format_table
from .colors import Colors

__all__ = ["ReportPrinter", "format_table", "Colors"]
