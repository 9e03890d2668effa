"""
Terminal styles for CLI reports

Styles are named by what they mark (``header``, ``ok``, ``fail``...) rather
than by color. Report files never go through here.
"""

import os
import sys
from typing import Dict

_ANSI: Dict[str, str] = {
    "reset": "\033[0m",
    "dim": "\033[2m",
    "header": "\033[1;96m",
    "info": "\033[36m",
    "ok": "\033[92m",
    "warn": "\033[93m",
    "fail": "\033[91m",
}


def _terminal_wants_color() -> bool:
    if os.environ.get("FORCE_COLOR", "").lower() in ("1", "true", "yes"):
        return True
    if os.environ.get("NO_COLOR"):
        return False
    return hasattr(sys.stdout, "isatty") and sys.stdout.isatty()


class Colors:
    """Process-wide style table; ``disable_colors`` blanks every entry"""

    enabled = _terminal_wants_color()
    codes: Dict[str, str] = dict(_ANSI) if enabled else {name: "" for name in _ANSI}

    @classmethod
    def disable_colors(cls):
        cls.enabled = False
        cls.codes = {name: "" for name in _ANSI}

    @classmethod
    def paint(cls, text: str, style: str) -> str:
        """Wrap ``text`` in ``style``; unknown styles leave it plain"""
        code = cls.codes.get(style, "")
        return f"{code}{text}{cls.codes['reset']}" if code else text
