#!/usr/bin/env python3
"""
Run ebt-rvnn from a source checkout: python3 ebt_cli.py <subcommand> ...
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from ebt_rvnn.cli import cli_main  # noqa: E402

if __name__ == "__main__":
    sys.exit(cli_main(sys.argv[1:]))
