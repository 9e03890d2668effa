"""
Report printer - everything the CLI writes to the terminal
"""

import sys
from typing import List, Sequence, TextIO

from .colors import Colors
from ..utils.logging import get_logger
from .. import _version


def format_table(columns: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Render rows as an aligned plain-text table (no colors, safe to write to files)"""
    cells = [[str(c) for c in columns]] + [[str(v) for v in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]

    lines = []
    for index, row in enumerate(cells):
        lines.append("  ".join(value.rjust(widths[i]) if i else value.ljust(widths[i])
                               for i, value in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


class ReportPrinter:
    """Prints headers, status lines and tables for the CLI"""

    def __init__(self, no_color: bool = False, stream: TextIO = None, error_stream: TextIO = None):
        self.logger = get_logger(__name__)
        self.stream = stream or sys.stdout
        self.error_stream = error_stream or sys.stderr

        if no_color:
            Colors.disable_colors()

    def print_header(self, title: str):
        """Print a section header"""
        banner = f"ebt-rvnn v{_version.version} :: {title}"
        print(Colors.paint(banner, "header"), file=self.stream)
        print(Colors.paint("=" * len(banner), "dim"), file=self.stream)

    def print_info(self, message: str):
        print(Colors.paint(message, "info"), file=self.stream)

    def print_success(self, message: str):
        print(Colors.paint(f"✓ {message}", "ok"), file=self.stream)

    def print_warning(self, message: str):
        print(Colors.paint(f"⚠ {message}", "warn"), file=self.stream)

    def print_error(self, message: str):
        print(Colors.paint(f"✗ {message}", "fail"), file=self.error_stream)

    def print_table(self, columns: Sequence[str], rows: List[Sequence[object]]):
        """Print an aligned table"""
        print(format_table(columns, rows), file=self.stream)
        print(file=self.stream)
