"""
Helper utility functions
"""

import platform
import sys
from typing import Any, Dict, List, TextIO

import psutil

from ..errors import ConfigError


def _humanize(value: float, base: float, units: List[str]) -> str:
    i = 0
    while value >= base and i < len(units) - 1:
        value /= base
        i += 1
    return f"{value:.1f}{units[i]}"


def format_scalar_count(count: int) -> str:
    """Format a scalar count in human readable form (1.2M, 340.0K)"""
    if count < 1000:
        return str(count)
    return _humanize(float(count), 1000.0, ["", "K", "M", "G", "T"])


def format_file_size(size_bytes: int) -> str:
    """Format file size in human readable format"""
    if size_bytes == 0:
        return "0B"
    return _humanize(float(size_bytes), 1024.0, ["B", "KB", "MB", "GB", "TB"])


def parse_int_list(text: str) -> List[int]:
    """Parse '50,100,200' into [50, 100, 200]"""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"Expected a comma-separated list of integers, got {text!r}")
    if not values:
        raise ConfigError("Expected at least one integer")
    return values


def get_system_info() -> Dict[str, Any]:
    """Host facts echoed at the top of benchmark reports"""
    try:
        frequency = psutil.cpu_freq()
    except (NotImplementedError, OSError):
        frequency = None
    return {
        "platform": platform.system(),
        "architecture": platform.machine() or platform.architecture()[0],
        "python_version": platform.python_version(),
        "cpu_count": psutil.cpu_count(logical=False) or psutil.cpu_count(),
        "cpu_mhz": round(frequency.max or frequency.current) if frequency else None,
        "memory_total": psutil.virtual_memory().total,
        "memory_available": psutil.virtual_memory().available,
    }


class ProgressBar:
    """One-line terminal progress for training batches"""

    def __init__(self, total: int, width: int = 30, stream: TextIO = None, label: str = ""):
        self.total = max(total, 1)
        self.width = width
        self.stream = stream or sys.stderr
        self.label = label
        self.current = 0

    def update(self, step: int, suffix: str = ""):
        """Redraw at ``step`` of ``total``; the bar ends its line on the last step"""
        self.current = min(step, self.total)
        filled = self.width * self.current // self.total
        bar = "#" * filled + "." * (self.width - filled)
        line = f"\r{self.label}[{bar}] {self.current}/{self.total}"
        print(f"{line} {suffix}" if suffix else line, end="", flush=True, file=self.stream)
        if self.current >= self.total:
            print(file=self.stream)
