"""Core capability: parse models and report well-formedness findings."""
from __future__ import annotations

import logging
from typing import Dict, List

from workbench.model import validate_model
from workbench.parser import load_model

logger = logging.getLogger(__name__)


class CheckModelsError(Exception):
    """Raised when check inputs are invalid."""


def check_models(models: List[str]) -> Dict[str, object]:
    if not models:
        raise CheckModelsError("at least one model is required")

    reports: List[Dict[str, object]] = []
    lines: List[str] = []
    for path in models:
        report = validate_model(load_model(path))
        findings = [
            {
                "rule": f.rule,
                "message": f.message,
                "location": str(f.location) if f.location else None,
            }
            for f in report.findings
        ]
        reports.append({"path": path, "findings": findings, "clean": report.clean})
        lines.extend(str(f) for f in report.findings)
        lines.append(f"{path}: {'ok' if report.clean else f'{len(findings)} finding(s)'}")
        logger.debug("checked %s", path)

    return {
        "models": reports,
        "clean": all(r["clean"] for r in reports),
        "text": "\n".join(lines) + "\n",
    }
