"""Shared helpers for the workbench capabilities: settings and source loading."""
from __future__ import annotations

import logging
from typing import Any, List, Optional, Sequence, Tuple

from workbench.ast import Model, SourceLocation, TestSuite
from workbench.config import Settings, load_settings
from workbench.errors import SourceError
from workbench.model import validate_model
from workbench.parser import ParseDiagnostic, load_model, load_suites, merge_suites

logger = logging.getLogger(__name__)


def resolve_settings(config: Optional[str] = None, **overrides: Any) -> Settings:
    """Settings from the config file and environment, then the explicit overrides."""
    return load_settings(config).with_overrides(**overrides)


def well_formed_model(path: str) -> Model:
    """Parse a model and refuse it when validation reports any finding."""
    model = load_model(path)
    report = validate_model(model)
    if not report.clean:
        diagnostics = [
            ParseDiagnostic(f.location or SourceLocation(path, 1, 1), f"{f.rule}: {f.message}", code=f.rule)
            for f in report.findings
        ]
        raise SourceError("invalid-model", f"{path}: {len(diagnostics)} well-formedness finding(s)", diagnostics)
    return model


def load_workspace(model_path: str, test_paths: Sequence[str]) -> Tuple[Model, List[Tuple[str, TestSuite]], TestSuite]:
    model = well_formed_model(model_path)
    suites = load_suites(model, test_paths)
    suite = merge_suites(suites)
    logger.debug("loaded %d test(s) from %d file(s)", len(suite.tests), len(suites))
    return model, suites, suite
