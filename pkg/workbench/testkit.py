"""Run tests: instantiate the setup, drive it, then judge with the oracle.

A test passes when no phase reports a failure or an error. Faults inside a
trigger stop the test; a failed checkpoint does not.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from workbench.ast import (
    TESTER,
    BoolLit,
    Checkpoint,
    ExpectedMessage,
    Expr,
    IntLit,
    LinkDecl,
    Model,
    ObjectPattern,
    PatternObject,
    SourceLocation,
    StrLit,
    TestCase,
    TestSuite,
    TriggerCall,
    Var,
)
from workbench.errors import EvalError, RuntimeFault
from workbench.model import is_subclass, role_info
from workbench.ocl import Evaluator, check_invariants, values_equal
from workbench.runtime import (
    Budget,
    CallEvent,
    FiredTransition,
    Interpreter,
    TraceEvent,
    check_multiplicities,
    instantiate,
)
from workbench.space import ObjectRef, ObjectSpace, Value, format_value, serialize_space
from workbench.typecheck import free_vars

logger = logging.getLogger(__name__)

PHASES = ("setup", "driver", "checkpoint", "oracle", "invariants")


@dataclass(frozen=True)
class Diagnostic:
    phase: str
    kind: str  # fail | error
    message: str
    location: Optional[SourceLocation] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "phase": self.phase,
            "kind": self.kind,
            "message": self.message,
            "location": str(self.location) if self.location else None,
        }


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    name: str
    category: str
    status: str  # pass | fail | error
    diagnostics: Tuple[Diagnostic, ...] = ()
    fired: Tuple[FiredTransition, ...] = ()
    space: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "name": self.name,
            "category": self.category,
            "status": self.status,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }
        if self.space is not None:
            data["space"] = self.space
        return data


# --- pattern matching -----------------------------------------------------------------


@dataclass(frozen=True)
class NoMatch:
    explanation: str


def _literal(value: Expr, bindings: Mapping[str, ObjectRef]) -> Optional[Value]:
    if isinstance(value, (IntLit, BoolLit, StrLit)):
        return value.value
    if isinstance(value, Var):
        return bindings.get(value.name)
    return None


def _describe(value: Expr) -> str:
    if isinstance(value, Var):
        return value.name
    from workbench.printer import print_expr

    return print_expr(value)


class _PatternSearch:
    def __init__(self, pattern: ObjectPattern, space: ObjectSpace, seed: Mapping[str, ObjectRef]) -> None:
        self.pattern = pattern
        self.space = space
        self.seed = dict(seed)
        self.names = {obj.name for obj in pattern.objects}
        self.failure: Optional[Tuple[int, str]] = None

    def _fail(self, depth: int, message: str) -> None:
        if self.failure is None or depth > self.failure[0]:
            self.failure = (depth, message)

    def _candidates(self, obj: PatternObject, used: set) -> List[ObjectRef]:
        if obj.name in self.seed:
            return [self.seed[obj.name]]
        return [ref for ref in self.space.instances_of(obj.cls) if ref not in used]

    def _attributes_hold(self, obj: PatternObject, ref: ObjectRef, bindings: Mapping[str, ObjectRef], depth: int) -> bool:
        record = self.space.get(ref)
        if not is_subclass(self.space.model, record.cls, obj.cls):
            self._fail(depth, f"{obj.name}: {ref} is a {record.cls}, not a {obj.cls}")
            return False
        for attr, expected in obj.constraints:
            if isinstance(expected, Var) and expected.name not in bindings:
                continue
            wanted = _literal(expected, bindings)
            actual = record.attributes.get(attr)
            if actual is None or not values_equal(actual, wanted):
                shown = format_value(actual) if actual is not None else "unset"
                self._fail(depth, f"{obj.name}: {obj.cls}: no object with {attr} = {_describe(expected)} ({ref} has {shown})")
                return False
        return True

    def _deferred_hold(self, bindings: Mapping[str, ObjectRef], depth: int) -> bool:
        """Constraints naming other pattern objects and link constraints, once all are bound."""
        for obj in self.pattern.objects:
            record = self.space.get(bindings[obj.name])
            for attr, expected in obj.constraints:
                if isinstance(expected, Var) and expected.name in self.names:
                    actual = record.attributes.get(attr)
                    if actual is None or not values_equal(actual, bindings.get(expected.name)):
                        self._fail(depth, f"{obj.name}: {attr} is not {expected.name}")
                        return False
        for link in self.pattern.links:
            if not self._link_holds(link, bindings):
                self._fail(depth, f"link {link.source}.{link.role} += {link.target} does not hold")
                return False
        return True

    def _link_holds(self, link: LinkDecl, bindings: Mapping[str, ObjectRef]) -> bool:
        source, target = bindings.get(link.source), bindings.get(link.target)
        if source is None or target is None:
            return False
        info = role_info(self.space.model, self.space.get(source).cls, link.role)
        return info is not None and target in self.space.partners(source, info)

    def search(self) -> Optional[Dict[str, ObjectRef]]:
        pinned = {self.seed[n] for n in self.names if n in self.seed}
        return self._extend(0, dict(self.seed), pinned)

    def _extend(self, index: int, bindings: Dict[str, ObjectRef], used: set) -> Optional[Dict[str, ObjectRef]]:
        objects = self.pattern.objects
        if index == len(objects):
            return dict(bindings) if self._deferred_hold(bindings, index) else None
        obj = objects[index]
        candidates = self._candidates(obj, used)
        if not candidates:
            self._fail(index, f"{obj.name}: no {obj.cls} object is left to match")
        for ref in candidates:
            if not self._attributes_hold(obj, ref, bindings, index):
                continue
            if obj.name in self.seed:
                found = self._extend(index + 1, bindings, used)
                if found is not None:
                    return found
                continue
            bindings[obj.name] = ref
            used.add(ref)
            found = self._extend(index + 1, bindings, used)
            if found is not None:
                return found
            used.discard(ref)
            del bindings[obj.name]
        return None


def match_pattern(
    pattern: ObjectPattern, space: ObjectSpace, seed: Mapping[str, ObjectRef]
) -> Union[Dict[str, ObjectRef], NoMatch]:
    """Injective assignment of pattern objects to space objects, consistent with `seed`."""
    search = _PatternSearch(pattern, space, seed)
    found = search.search()
    if found is not None:
        return found
    return NoMatch(search.failure[1] if search.failure else "pattern does not match")


# --- trace matching -------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectedCall:
    """An expected message resolved to objects; args None leaves arguments unconstrained."""

    sender: Optional[ObjectRef]
    receiver: ObjectRef
    method: str
    args: Optional[Tuple[Value, ...]] = None

    def matches(self, event: CallEvent) -> bool:
        if (event.caller, event.callee, event.method) != (self.sender, self.receiver, self.method):
            return False
        if self.args is None:
            return True
        return len(self.args) == len(event.args) and all(values_equal(a, b) for a, b in zip(self.args, event.args))

    def __str__(self) -> str:
        sender = TESTER if self.sender is None else str(self.sender)
        args = "" if self.args is None else ", ".join(format_value(a) for a in self.args)
        return f"{sender} -> {self.receiver} : {self.method}({args})"


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    position: Optional[int] = None  # 1-based position of the first divergence
    message: str = ""


def _show(event: CallEvent) -> str:
    sender = TESTER if event.caller is None else str(event.caller)
    return f"{sender} -> {event.callee} : {event.method}({', '.join(format_value(a) for a in event.args)})"


def match_trace(expected: Sequence[ExpectedCall], trace: Sequence[TraceEvent], mode: str) -> MatchResult:
    calls = [e for e in trace if isinstance(e, CallEvent)]
    if mode == "loose":
        cursor = 0
        for position, wanted in enumerate(expected, start=1):
            while cursor < len(calls) and not wanted.matches(calls[cursor]):
                cursor += 1
            if cursor == len(calls):
                return MatchResult(False, position, f"expected message {position} ({wanted}) does not occur in order")
            cursor += 1
        return MatchResult(True)

    participants = {e.sender for e in expected} | {e.receiver for e in expected}
    observed = [c for c in calls if c.caller in participants and c.callee in participants]
    for position, (wanted, seen) in enumerate(zip(expected, observed), start=1):
        if not wanted.matches(seen):
            return MatchResult(False, position, f"message {position}: expected {wanted}, observed {_show(seen)}")
    if len(observed) > len(expected):
        position = len(expected) + 1
        return MatchResult(False, position, f"message {position}: unexpected {_show(observed[len(expected)])}")
    if len(observed) < len(expected):
        position = len(observed) + 1
        return MatchResult(False, position, f"message {position}: expected {expected[len(observed)]}, observed nothing")
    return MatchResult(True)


# --- running ---------------------------------------------------------------------------


class _Run:
    def __init__(self, model: Model, test: TestCase, budget: Budget, ignore_unexpected_events: bool) -> None:
        self.model = model
        self.test = test
        self.budget = budget
        self.ignore = ignore_unexpected_events
        self.diagnostics: List[Diagnostic] = []

    def add(self, phase: str, kind: str, message: str, location: Optional[SourceLocation] = None) -> None:
        self.diagnostics.append(Diagnostic(phase, kind, message, location or self.test.loc))

    def result(self, fired: Sequence[FiredTransition] = (), space: Optional[str] = None) -> TestResult:
        kinds = {d.kind for d in self.diagnostics}
        status = "error" if "error" in kinds else "fail" if "fail" in kinds else "pass"
        return TestResult(self.test.name, self.test.category, status, tuple(self.diagnostics), tuple(fired), space)

    def _holds(self, evaluator: Evaluator, expr: Expr, env: Mapping[str, Value], phase: str, what: str, location) -> None:
        try:
            value = evaluator.eval(expr, env)
        except EvalError as exc:
            self.add(phase, "error", f"{what}: {exc}", location)
            return
        except RecursionError:
            self.add(phase, "error", f"{what}: budget-exhausted: expression nesting too deep", location)
            return
        if value is not True:
            from workbench.printer import print_expr

            self.add(phase, "fail", f"{what} does not hold: {print_expr(expr)}", location)

    def run(self, dump_space: bool) -> TestResult:
        test = self.test
        try:
            space = instantiate(self.model, test.setup)
        except RuntimeFault as exc:
            self.add("setup", "error", str(exc))
            return self.result()
        names: Dict[str, Value] = dict(space.names())
        interpreter = Interpreter(space, self.budget, self.ignore)
        evaluator = interpreter.evaluator

        expected: List[ExpectedMessage] = []
        for item in test.driver.items:
            if isinstance(item, TriggerCall):
                try:
                    interpreter.trigger(item.call, names)
                except (RuntimeFault, EvalError) as exc:
                    self.add("driver", "error", f"{item.call.method}: {exc}", item.loc)
                    return self.result(interpreter.fired, serialize_space(space) if dump_space else None)
            elif isinstance(item, Checkpoint):
                self._holds(evaluator, item.expr, names, "checkpoint", "checkpoint", item.loc)
            else:
                expected.append(item)

        if expected:
            self._match_messages(expected, names, evaluator, interpreter.trace)

        bindings: Dict[str, Value] = dict(names)
        pattern = test.oracle.pattern
        if pattern is not None:
            seed = {n: v for n, v in names.items() if isinstance(v, ObjectRef)}
            matched = match_pattern(pattern, space, seed)
            if isinstance(matched, NoMatch):
                self.add("oracle", "fail", f"pattern does not match: {matched.explanation}")
            else:
                bindings.update(matched)
        for assertion in test.oracle.assertions:
            unbound = sorted(free_vars(assertion) - set(bindings))
            if unbound:
                self.add("oracle", "fail", f"not evaluated: pattern did not bind {', '.join(unbound)}", assertion.loc)
                continue
            self._holds(evaluator, assertion, bindings, "oracle", "assertion", assertion.loc)

        for verdict in check_invariants(self.model, space, self.budget.max_depth):
            if verdict.verdict != "pass":
                self.add("invariants", verdict.verdict, verdict.message)
        for problem in check_multiplicities(space):
            self.add("invariants", "fail", f"multiplicity-violation: {problem}")
        return self.result(interpreter.fired, serialize_space(space) if dump_space else None)

    def _match_messages(self, expected: Sequence[ExpectedMessage], names: Mapping[str, Value], evaluator: Evaluator, trace) -> None:
        resolved: List[ExpectedCall] = []
        for item in expected:
            try:
                args = tuple(evaluator.eval(arg, names) for arg in item.args) if item.args else None
            except EvalError as exc:
                self.add("driver", "error", f"expected message {item.method}: {exc}", item.loc)
                return
            sender = None if item.sender == TESTER else names.get(item.sender)
            resolved.append(ExpectedCall(sender, names[item.receiver], item.method, args))
        outcome = match_trace(resolved, trace, self.test.effective_mode)
        if not outcome.matched:
            location = expected[outcome.position - 1].loc if outcome.position and outcome.position <= len(expected) else None
            self.add("driver", "fail", f"interaction mismatch ({self.test.effective_mode}): {outcome.message}", location)


def run_test(
    model: Model,
    test: TestCase,
    budget: Optional[Budget] = None,
    ignore_unexpected_events: bool = False,
    dump_space: bool = False,
) -> TestResult:
    result = _Run(model, test, budget or Budget(), ignore_unexpected_events).run(dump_space)
    logger.debug("test %s: %s", test.name, result.status)
    return result


def select_tests(suite: TestSuite, category: Optional[str] = None, name_filter: Optional[str] = None) -> TestSuite:
    return TestSuite(tuple(
        t for t in suite.tests
        if (category is None or t.category == category) and (not name_filter or name_filter in t.name)
    ))


def run_suite(
    model: Model,
    suite: TestSuite,
    budget: Optional[Budget] = None,
    jobs: int = 1,
    ignore_unexpected_events: bool = False,
    dump_space: bool = False,
) -> List[TestResult]:
    """Results in declaration order whatever the number of workers."""

    def one(test: TestCase) -> TestResult:
        return run_test(model, test, budget, ignore_unexpected_events, dump_space)

    if jobs <= 1 or len(suite.tests) <= 1:
        return [one(t) for t in suite.tests]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, suite.tests))


def results_to_dict(results: Sequence[TestResult]) -> Dict[str, object]:
    counts = {"pass": 0, "fail": 0, "error": 0}
    for result in results:
        counts[result.status] += 1
    return {
        "results": [r.to_dict() for r in results],
        "passed": counts["fail"] == 0 and counts["error"] == 0,
        "counts": counts,
    }


def render_results(results: Sequence[TestResult]) -> str:
    """One line per test, its diagnostics indented below, then the totals."""
    lines: List[str] = []
    for result in results:
        label = {"pass": "ok", "fail": "FAIL", "error": "ERROR"}[result.status]
        lines.append(f"{label} {result.name} [{result.category}]")
        for d in result.diagnostics:
            where = f"{d.location}: " if d.location else ""
            lines.append(f"  {where}{d.phase}/{d.kind}: {d.message}")
        if result.space is not None:
            lines.extend(f"  {line}" for line in result.space.splitlines())
    counts = results_to_dict(results)["counts"]
    lines.append(f"{counts['pass']} passed, {counts['fail']} failed, {counts['error']} error(s)")
    return "\n".join(lines) + "\n"
