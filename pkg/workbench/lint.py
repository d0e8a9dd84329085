"""Style rules for acceptance tests.

Acceptance tests should observe the system through its published interface
and describe only the effects that matter. Each rule reports a finding; L3
is advisory and never fails a lint run.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from workbench.ast import TESTER, BinOp, ExpectedMessage, Model, Nav, SourceLocation, TestCase, TestSuite, TriggerCall
from workbench.model import attribute_type, effective_attributes, effective_methods, find_method
from workbench.typecheck import setup_names, static_type, subexpressions

logger = logging.getLogger(__name__)

DEFAULT_OVER_SPECIFICATION_THRESHOLD = 0.5
ADVISORY_RULES = frozenset({"L3"})


@dataclass(frozen=True)
class LintFinding:
    test: str
    rule: str
    message: str
    location: Optional[SourceLocation] = None

    @property
    def advisory(self) -> bool:
        return self.rule in ADVISORY_RULES

    def __str__(self) -> str:
        where = f"{self.location}: " if self.location else ""
        note = " (advisory)" if self.advisory else ""
        return f"{where}{self.rule}{note}: {self.test}: {self.message}"

    def to_dict(self) -> Dict[str, object]:
        return {
            "test": self.test,
            "rule": self.rule,
            "advisory": self.advisory,
            "message": self.message,
            "location": str(self.location) if self.location else None,
        }


def _capitalized(name: str) -> str:
    return name[:1].upper() + name[1:]


def _published_query_for(model: Model, cls: str, attr: str) -> Optional[str]:
    methods = effective_methods(model, cls)
    for prefix in ("get", "is"):
        candidate = prefix + _capitalized(attr)
        if candidate in methods:
            method = methods[candidate][1]
            if method.published and method.is_query:
                return candidate
    return None


def _class_published(model: Model, cls: Optional[str]) -> bool:
    found = model.class_named(cls) if cls else None
    return bool(found and found.published)


class _TestLinter:
    def __init__(self, model: Model, test: TestCase, threshold: float) -> None:
        self.model = model
        self.test = test
        self.threshold = threshold
        self.names = setup_names(test)
        self.findings: List[LintFinding] = []

    def add(self, rule: str, message: str, location: Optional[SourceLocation]) -> None:
        self.findings.append(LintFinding(self.test.name, rule, message, location or self.test.loc))

    def run(self) -> List[LintFinding]:
        self._pattern_rules()
        self._assertion_rules()
        self._driver_rules()
        return self.findings

    def _pattern_rules(self) -> None:
        pattern = self.test.oracle.pattern
        if pattern is None:
            return
        for obj in pattern.objects:
            total = len(effective_attributes(self.model, obj.cls))
            constrained = len({attr for attr, _ in obj.constraints})
            if total and constrained / total > self.threshold:
                self.add(
                    "L1",
                    f"pattern object '{obj.name}' constrains {constrained} of {total} attributes of {obj.cls}",
                    obj.loc,
                )
        if len(pattern.objects) > len(self.test.setup.objects):
            self.add(
                "L2",
                f"pattern describes {len(pattern.objects)} objects, setup creates {len(self.test.setup.objects)}",
                None,
            )

    def _variables(self) -> Dict[str, str]:
        variables = dict(self.names)
        if self.test.oracle.pattern is not None:
            variables.update({o.name: o.cls for o in self.test.oracle.pattern.objects})
        return variables

    def _attribute_read(self, expr: Nav, variables: Dict[str, str]) -> Optional[str]:
        """Class whose attribute `expr` reads, or None for role navigation."""
        owner = static_type(self.model, expr.source, variables)
        if owner is None or self.model.class_named(owner) is None:
            return None
        return owner if attribute_type(self.model, owner, expr.name) is not None else None

    def _assertion_rules(self) -> None:
        variables = self._variables()
        for assertion in self.test.oracle.assertions:
            for expr in subexpressions(assertion):
                if isinstance(expr, BinOp) and expr.op == "==":
                    for side in (expr.left, expr.right):
                        if isinstance(side, Nav) and static_type(self.model, side, variables) == "Int":
                            if self._attribute_read(side, variables):
                                self.add("L3", f"'{side.name}' is compared with ==; a range may be expressible", expr.loc)
                                break
                if isinstance(expr, Nav):
                    owner = self._attribute_read(expr, variables)
                    query = _published_query_for(self.model, owner, expr.name) if owner else None
                    if query:
                        self.add("L4", f"reads {owner}.{expr.name} directly; use {query}()", expr.loc)

    def _driver_rules(self) -> None:
        for item in self.test.driver.items:
            if isinstance(item, TriggerCall):
                self._trigger(item)
            elif isinstance(item, ExpectedMessage) and item.sender != TESTER:
                sender, receiver = self.names.get(item.sender), self.names.get(item.receiver)
                if not _class_published(self.model, sender) and not _class_published(self.model, receiver):
                    self.add(
                        "L5",
                        f"observes internal message {item.sender} -> {item.receiver} : {item.method}",
                        item.loc,
                    )

    def _trigger(self, item: TriggerCall) -> None:
        call = item.call
        target = static_type(self.model, call.target, self.names)
        if target is None or self.model.class_named(target) is None:
            return
        if not _class_published(self.model, target):
            self.add("L6", f"trigger targets unpublished class {target}", item.loc)
            return
        found = find_method(self.model, target, call.method)
        if found is not None and not found[1].published:
            self.add("L6", f"trigger calls unpublished method {target}.{call.method}", item.loc)


def lint_acceptance(model: Model, test: TestCase, threshold: float = DEFAULT_OVER_SPECIFICATION_THRESHOLD) -> List[LintFinding]:
    if test.category != "acceptance":
        return []
    return _TestLinter(model, test, threshold).run()


def lint_suite(model: Model, suite: TestSuite, threshold: float = DEFAULT_OVER_SPECIFICATION_THRESHOLD) -> List[LintFinding]:
    findings: List[LintFinding] = []
    for test in suite.tests:
        findings.extend(lint_acceptance(model, test, threshold))
    logger.debug("lint: %d finding(s) over %d test(s)", len(findings), len(suite.tests))
    return findings


def has_blocking(findings: Sequence[LintFinding]) -> bool:
    return any(not f.advisory for f in findings)


def lint_report(findings: Sequence[LintFinding]) -> Dict[str, object]:
    return {"findings": [f.to_dict() for f in findings], "clean": not has_blocking(findings)}
