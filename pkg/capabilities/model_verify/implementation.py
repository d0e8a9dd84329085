"""Core capability: check that a refactoring preserves the observations of a test suite."""
from __future__ import annotations

import logging
from datetime import datetime, timezone
from typing import Dict, List

from capabilities._workbench_common import load_workspace, resolve_settings, well_formed_model
from workbench.errors import UsageError
from workbench.invariance import compare_models, verify_invariance
from workbench.parser import load_script

logger = logging.getLogger(__name__)


def verify_model(
    model: str,
    tests: List[str],
    script: str | None = None,
    after: str | None = None,
    jobs: int | None = None,
    ignore_unexpected_events: bool | None = None,
    timestamps: bool = False,
    max_steps: int | None = None,
    max_depth: int | None = None,
    config: str | None = None,
) -> Dict[str, object]:
    if (script is None) == (after is None):
        raise UsageError("usage", "exactly one of script or after is required")

    settings = resolve_settings(
        config,
        jobs=jobs,
        ignore_unexpected_events=ignore_unexpected_events,
        max_steps=max_steps,
        max_depth=max_depth,
    )
    parsed, _, suite = load_workspace(model, tests)
    options = dict(
        budget=settings.budget,
        jobs=settings.jobs,
        ignore_unexpected_events=settings.ignore_unexpected_events,
        threshold=settings.over_specification_threshold,
    )
    if script is not None:
        report = verify_invariance(parsed, suite, load_script(parsed, script), **options)
    else:
        report = compare_models(parsed, well_formed_model(after), suite, **options)
    logger.debug("verify gate %s", report.gate)

    generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamps else None
    result = report.to_dict(generated_at)
    result["text"] = report.render()
    return result
