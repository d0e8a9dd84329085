"""Check that a refactoring leaves test observations unchanged.

The suite runs on the model before and after the script; each test gets a
verdict from its two statuses and its co-transformation disposition.
Acceptance tests that only use the published interface gate the result.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from workbench.ast import Model, Refactoring, TestSuite
from workbench.errors import ScriptBlocked
from workbench.lint import lint_suite
from workbench.refactor import ADAPTED, NEEDS_ATTENTION, UNCHANGED, StepOutcome, TestDisposition, apply_script
from workbench.runtime import Budget
from workbench.testkit import TestResult, run_suite

logger = logging.getLogger(__name__)

FAILING_VERDICTS = frozenset({"broken", "adapted-fail"})


@dataclass(frozen=True)
class InvarianceEntry:
    name: str
    category: str
    before: Optional[str]
    after: Optional[str]
    disposition: str
    verdict: str
    gating: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "category": self.category,
            "before": self.before,
            "after": self.after,
            "disposition": self.disposition,
            "verdict": self.verdict,
            "gating": self.gating,
        }


@dataclass(frozen=True)
class InvarianceReport:
    steps: Tuple[StepOutcome, ...] = ()
    tests: Tuple[InvarianceEntry, ...] = ()
    blocked_at: Optional[int] = None

    @property
    def gate(self) -> str:
        if self.blocked_at is not None:
            return "fail"
        if any(t.gating and t.verdict in FAILING_VERDICTS for t in self.tests):
            return "fail"
        return "pass"

    def to_dict(self, generated_at: Optional[str] = None) -> Dict[str, object]:
        data: Dict[str, object] = {
            "steps": [s.conditions.to_dict() for s in self.steps],
            "tests": [t.to_dict() for t in self.tests],
            "gate": self.gate,
            "blocked_at": self.blocked_at,
        }
        if generated_at is not None:
            data["generated_at"] = generated_at
        return data

    def render(self) -> str:
        lines: List[str] = []
        for outcome in self.steps:
            report = outcome.conditions.to_dict()
            lines.append(f"step {report['step']} {report['verdict']}")
            lines.extend(f"  {v['condition']}: {v['message']}" for v in report["violations"])
        for t in self.tests:
            gate = " gating" if t.gating else ""
            lines.append(
                f"{t.verdict} {t.name} [{t.category}]{gate} {t.before or '-'} -> {t.after or '-'} ({t.disposition})"
            )
        if self.blocked_at is not None:
            lines.append(f"blocked at step {self.blocked_at}")
        lines.append(f"gate: {self.gate}")
        return "\n".join(lines) + "\n"


def classify(disposition: str, before: Optional[str], after: Optional[str]) -> str:
    if disposition == NEEDS_ATTENTION:
        return "attention"
    if disposition == ADAPTED:
        return "adapted-pass" if after == "pass" else "adapted-fail"
    if before != "pass":
        return "excluded"
    return "invariant" if after == "pass" else "broken"


def _gating(model: Model, suite: TestSuite, threshold: float) -> Dict[str, bool]:
    unpublished = {f.test for f in lint_suite(model, suite, threshold) if f.rule == "L6"}
    return {t.name: t.category == "acceptance" and t.name not in unpublished for t in suite.tests}


def _statuses(results: Sequence[TestResult]) -> Dict[str, str]:
    return {r.name: r.status for r in results}


def _entries(
    after_suite: TestSuite,
    before: Dict[str, str],
    after: Dict[str, str],
    dispositions: Dict[str, TestDisposition],
    gating: Dict[str, bool],
) -> Tuple[InvarianceEntry, ...]:
    entries: List[InvarianceEntry] = []
    for test in after_suite.tests:
        entry = dispositions.get(test.name)
        disposition = entry.disposition if entry else UNCHANGED
        origin = entry.clone_of if entry and entry.clone_of else test.name
        status_before = before.get(test.name)
        if status_before is None and disposition == UNCHANGED:
            disposition = ADAPTED
        entries.append(
            InvarianceEntry(
                name=test.name,
                category=test.category,
                before=status_before,
                after=after.get(test.name),
                disposition=disposition,
                verdict=classify(disposition, status_before, after.get(test.name)),
                gating=gating.get(origin, False),
            )
        )
    return tuple(entries)


def verify_invariance(
    model: Model,
    suite: TestSuite,
    steps: Sequence[Refactoring],
    budget: Optional[Budget] = None,
    jobs: int = 1,
    ignore_unexpected_events: bool = False,
    threshold: float = 0.5,
) -> InvarianceReport:
    before_results = run_suite(model, suite, budget, jobs, ignore_unexpected_events)
    before = _statuses(before_results)
    gating = _gating(model, suite, threshold)
    try:
        result = apply_script(model, suite, steps)
    except ScriptBlocked as blocked:
        logger.info("script blocked at step %d", blocked.index)
        entries = tuple(
            InvarianceEntry(t.name, t.category, before[t.name], None, UNCHANGED, "excluded", gating[t.name])
            for t in suite.tests
        )
        return InvarianceReport(tuple(blocked.reports), entries, blocked.index)
    after_results = run_suite(result.model, result.suite, budget, jobs, ignore_unexpected_events)
    entries = _entries(result.suite, before, _statuses(after_results), result.dispositions(), gating)
    report = InvarianceReport(result.steps, entries)
    logger.debug("invariance gate: %s", report.gate)
    return report


def compare_models(
    model: Model,
    after_model: Model,
    suite: TestSuite,
    budget: Optional[Budget] = None,
    jobs: int = 1,
    ignore_unexpected_events: bool = False,
    threshold: float = 0.5,
) -> InvarianceReport:
    """Run one suite against two models; every test counts as unchanged."""
    before = _statuses(run_suite(model, suite, budget, jobs, ignore_unexpected_events))
    after = _statuses(run_suite(after_model, suite, budget, jobs, ignore_unexpected_events))
    gating = _gating(model, suite, threshold)
    return InvarianceReport((), _entries(suite, before, after, {}, gating))
