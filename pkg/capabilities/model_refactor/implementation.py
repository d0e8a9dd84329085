"""Core capability: apply a refactoring script to a model and co-transform its tests."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from capabilities._workbench_common import load_workspace
from workbench.ast import TestSuite
from workbench.errors import ScriptBlocked, UsageError
from workbench.parser import load_script
from workbench.printer import print_model, print_tests
from workbench.refactor import ScriptResult, apply_script

logger = logging.getLogger(__name__)

REPORT_FILE = "refactor-report.json"


def _write(path: Path, text: str, written: List[str]) -> None:
    path.write_text(text, encoding="utf-8")
    written.append(str(path))


def _split(result: ScriptResult, suites: Sequence[Tuple[str, TestSuite]]) -> List[Tuple[str, TestSuite]]:
    """Put each test back in the file it came from; clones follow their original."""
    home = {test.name: path for path, suite in suites for test in suite.tests}
    dispositions = result.dispositions()
    grouped: Dict[str, list] = {path: [] for path, _ in suites}
    for test in result.suite.tests:
        entry = dispositions.get(test.name)
        origin = entry.clone_of if entry and entry.clone_of else test.name
        grouped[home[origin]].append(test)
    return [(path, TestSuite(tuple(tests))) for path, tests in grouped.items()]


def _outputs(model: str, tests: Sequence[str], out: Path) -> Dict[str, Path]:
    targets = {model: out / f"{Path(model).stem}.agm"}
    targets.update({path: out / Path(path).name for path in tests})
    names = [t.name for t in targets.values()]
    if len(set(names)) != len(names):
        raise UsageError("output-collision", "two inputs would be written to the same output file")
    inputs = {Path(p).resolve() for p in [model, *tests]}
    for target in targets.values():
        if target.resolve() in inputs:
            raise UsageError("output-collision", f"{target} would overwrite an input file")
    return targets


def _render(report: Dict[str, object]) -> str:
    lines: List[str] = []
    for number, step in enumerate(report["steps"], start=1):
        lines.append(f"step {number} {step['verdict']}: {step['step']}")
        lines.extend(f"  {v['condition']}: {v['message']}" for v in step["violations"])
    for entry in report["tests"]:
        detail = "; ".join(entry["edits"]) or entry["reason"] or ""
        lines.append(f"{entry['disposition']} {entry['name']}" + (f": {detail}" if detail else ""))
    if report["blocked_at"] is not None:
        lines.append(f"blocked at step {report['blocked_at']}; nothing was written")
    return "\n".join(lines) + "\n"


def refactor_model(model: str, tests: List[str], script: str, out: str) -> Dict[str, object]:
    parsed, suites, suite = load_workspace(model, tests)
    steps = load_script(parsed, script)
    out_dir = Path(out)
    targets = _outputs(model, tests, out_dir)

    written: List[str] = []
    try:
        result = apply_script(parsed, suite, steps)
    except ScriptBlocked as blocked:
        logger.info("%s", blocked.message)
        report: Dict[str, object] = {
            "steps": [o.to_dict() for o in blocked.reports],
            "tests": [],
            "blocked_at": blocked.index,
        }
    else:
        report = {**result.to_dict(), "blocked_at": None}
        out_dir.mkdir(parents=True, exist_ok=True)
        _write(targets[model], print_model(result.model), written)
        for path, part in _split(result, suites):
            _write(targets[path], print_tests(part), written)
        _write(out_dir / REPORT_FILE, json.dumps(report, indent=2, sort_keys=True) + "\n", written)
    logger.debug("wrote %d file(s) to %s", len(written), out_dir)
    return {
        "applied": report["blocked_at"] is None,
        "blocked_at": report["blocked_at"],
        "written": written,
        "report": report,
        "text": _render(report),
    }
