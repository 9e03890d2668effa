#!/usr/bin/env python3
"""
Development runner for ebt-rvnn: checks requirements.txt, then runs the CLI from src/
"""

import importlib
import os
import re
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent


def required_modules():
    """(import name, minimum version) pairs from requirements.txt"""
    pairs = []
    for line in (PROJECT_ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines():
        match = re.match(r"^\s*([A-Za-z0-9_.-]+)\s*(?:>=\s*([\w.]+))?", line)
        if match and not line.lstrip().startswith("#"):
            pairs.append((match.group(1).replace("-", "_"), match.group(2)))
    return pairs


def check_dependencies():
    """Print one line per requirement; False when any is missing"""
    missing = []
    for module_name, minimum in required_modules():
        try:
            module = importlib.import_module(module_name)
        except ImportError:
            missing.append(module_name)
            continue
        found = getattr(module, "__version__", "?")
        note = f" (want >= {minimum})" if minimum else ""
        print(f"✅ {module_name} {found}{note}", file=sys.stderr)

    if missing:
        print(f"\n❌ Missing dependencies: {', '.join(missing)}", file=sys.stderr)
        print("   Run ./install.sh or pip install -r requirements.txt", file=sys.stderr)
        return False
    return True


def main():
    if not check_dependencies():
        sys.exit(1)

    sys.path.insert(0, str(PROJECT_ROOT / "src"))
    os.chdir(PROJECT_ROOT)

    from ebt_rvnn.cli import main as cli
    cli()


if __name__ == "__main__":
    main()
