"""Core capability: derive unit test skeletons from a class's statechart."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict

from capabilities._workbench_common import well_formed_model
from workbench.derive import derive_tests

logger = logging.getLogger(__name__)


def derive_suite(model: str, class_name: str, criterion: str, out: str, k: int | None = None) -> Dict[str, object]:
    derived = derive_tests(well_formed_model(model), class_name, criterion, k)
    for warning in derived.warnings:
        logger.warning("%s: %s", class_name, warning)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{class_name}_{criterion}.agt"
    target.write_text(derived.render(), encoding="utf-8")
    logger.debug("wrote %d skeleton(s) to %s", len(derived.suite.tests), target)

    paths = [[f"{t.source} -{t.trigger}-> {t.target}" for t in path] for path in derived.paths]
    tests = [test.name for test in derived.suite.tests]
    text = "".join(f"{name}: {', '.join(path) or '(initial state)'}\n" for name, path in zip(tests, paths))
    return {
        "path": str(target),
        "tests": tests,
        "paths": paths,
        "unreachable": list(derived.unreachable),
        "warnings": list(derived.warnings),
        "text": text,
    }
