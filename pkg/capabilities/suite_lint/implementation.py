"""Core capability: check acceptance tests against the black-box standards."""
from __future__ import annotations

from typing import Dict, List

from capabilities._workbench_common import load_workspace, resolve_settings
from workbench.lint import lint_report, lint_suite


def lint_tests(
    model: str,
    tests: List[str],
    threshold: float | None = None,
    config: str | None = None,
) -> Dict[str, object]:
    settings = resolve_settings(config, over_specification_threshold=threshold)
    parsed, _, suite = load_workspace(model, tests)
    findings = lint_suite(parsed, suite, settings.over_specification_threshold)
    report = lint_report(findings)
    report["text"] = "".join(f"{finding}\n" for finding in findings)
    return report
