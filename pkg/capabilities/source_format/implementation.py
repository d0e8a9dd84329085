"""Core capability: print model, test and script files in canonical form."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List

from workbench.ast import Model, TestSuite
from workbench.parser import parse_syntax, read_source
from workbench.printer import print_model, print_refactorings, print_tests

logger = logging.getLogger(__name__)

MODES = ("check", "write")


class FormatSourcesError(Exception):
    """Raised when format inputs are invalid."""


def _canonical(tree) -> str:
    if isinstance(tree, Model):
        return print_model(tree)
    if isinstance(tree, TestSuite):
        return print_tests(tree)
    return print_refactorings(tree)


def format_sources(files: List[str], mode: str = "check") -> Dict[str, object]:
    if mode not in MODES:
        raise FormatSourcesError(f"mode must be one of {', '.join(MODES)}")

    entries: List[Dict[str, object]] = []
    lines: List[str] = []
    for path in files:
        text = read_source(path)
        formatted = _canonical(parse_syntax(text, path))
        canonical = formatted == text
        written = False
        if not canonical and mode == "write":
            Path(path).write_text(formatted, encoding="utf-8")
            written = True
            lines.append(f"formatted {path}")
        elif not canonical:
            lines.append(f"{path}: not canonical")
        entries.append({"path": path, "canonical": canonical, "written": written})
        logger.debug("%s canonical=%s", path, canonical)

    return {
        "files": entries,
        "canonical": all(e["canonical"] or e["written"] for e in entries),
        "text": "".join(f"{line}\n" for line in lines),
    }
