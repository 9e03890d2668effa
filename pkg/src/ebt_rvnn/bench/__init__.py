"""
Memory accounting and benchmark runner
"""

from .memory import MemStats, MemoryTracker, track
from .runner import BENCH_VARIANTS, BenchRow, BenchRunner, bench_run, report_csv, report_text, peak_ratio

__all__ = [
    "MemStats",
    "MemoryTracker",
    "track",
    "BENCH_VARIANTS",
    "BenchRow",
    "BenchRunner",
    "bench_run",
    "report_csv",
    "report_text",
    "peak_ratio",
]
