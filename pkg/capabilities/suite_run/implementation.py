"""Core capability: run model-based tests against a model."""
from __future__ import annotations

import logging
from typing import Dict, List

from capabilities._workbench_common import load_workspace, resolve_settings
from workbench.testkit import render_results, results_to_dict, run_suite, select_tests

logger = logging.getLogger(__name__)


class RunTestsError(Exception):
    """Raised when test run inputs are invalid."""


def run_tests(
    model: str,
    tests: List[str],
    category: str | None = None,
    name_filter: str | None = None,
    jobs: int | None = None,
    ignore_unexpected_events: bool | None = None,
    dump_space: bool = False,
    max_steps: int | None = None,
    max_depth: int | None = None,
    config: str | None = None,
) -> Dict[str, object]:
    if not tests:
        raise RunTestsError("at least one test file is required")

    settings = resolve_settings(
        config,
        jobs=jobs,
        ignore_unexpected_events=ignore_unexpected_events,
        max_steps=max_steps,
        max_depth=max_depth,
    )
    parsed, _, suite = load_workspace(model, tests)
    selected = select_tests(suite, category, name_filter)
    logger.debug("running %d of %d test(s)", len(selected.tests), len(suite.tests))
    results = run_suite(
        parsed,
        selected,
        settings.budget,
        settings.jobs,
        settings.ignore_unexpected_events,
        dump_space,
    )
    report = results_to_dict(results)
    report["text"] = render_results(results)
    return report
