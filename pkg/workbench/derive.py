"""Derive test skeletons from a class's statechart.

Each skeleton instantiates one object of the class, drives it along a path
of trigger calls from the initial state and asserts the final state. The
union of skeletons covers every reachable state, every reachable
transition, or every loop-free path up to a length bound.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from workbench.ast import (
    PRIMITIVE_TYPES,
    BoolLit,
    Driver,
    Expr,
    InState,
    IntLit,
    MethodCall,
    Model,
    ObjectDecl,
    Oracle,
    Setup,
    Statechart,
    StrLit,
    TestCase,
    TestSuite,
    Transition,
    TriggerCall,
    Var,
)
from workbench.errors import DerivationError
from workbench.model import descendants, effective_attributes, effective_statechart, find_method, is_abstract_class
from workbench.printer import print_expr, print_tests

logger = logging.getLogger(__name__)

CRITERIA = ("states", "transitions", "paths")
SUBJECT = "obj"

_DEFAULT_LITERALS = {"Int": IntLit(0), "Bool": BoolLit(False), "String": StrLit("")}

Path = Tuple[int, ...]  # transition indices


@dataclass(frozen=True)
class DerivedSuite:
    cls: str
    criterion: str
    suite: TestSuite
    paths: Tuple[Tuple[Transition, ...], ...] = ()
    notes: Dict[str, Dict[int, List[str]]] = field(default_factory=dict)
    unreachable: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()

    def render(self) -> str:
        return print_tests(self.suite, self.notes)


# --- graph search -----------------------------------------------------------------------


def shortest_paths(chart: Statechart) -> Dict[str, Path]:
    """Breadth-first: for each reachable state, the shortest transition path to it."""
    found: Dict[str, Path] = {chart.initial: ()}
    queue = deque([chart.initial])
    while queue:
        state = queue.popleft()
        for index, t in enumerate(chart.transitions):
            if t.source == state and t.target not in found:
                found[t.target] = found[state] + (index,)
                queue.append(t.target)
    return found


def unreachable_states(chart: Statechart) -> List[str]:
    reached = shortest_paths(chart)
    return [s for s in chart.states if s not in reached]


def _state_cover(chart: Statechart) -> List[Path]:
    reached = shortest_paths(chart)
    covered = {chart.initial}
    # deepest first, so a single path covers the states on the way
    targets = sorted((s for s in chart.states if s in reached), key=lambda s: -len(reached[s]))
    paths: List[Path] = []
    for state in targets:
        if state in covered:
            continue
        path = reached[state]
        paths.append(path)
        covered.update(chart.transitions[i].target for i in path)
    return paths


def _transition_cover(chart: Statechart) -> List[Path]:
    reached = shortest_paths(chart)
    pending = [i for i, t in enumerate(chart.transitions) if t.source in reached]
    covered: set = set()
    paths: List[Path] = []
    for index in pending:
        if index in covered:
            continue
        path = _extend_greedily(chart, reached[chart.transitions[index].source] + (index,), covered)
        paths.append(path)
        covered.update(path)
    return paths


def _extend_greedily(chart: Statechart, path: Path, covered: set) -> Path:
    """Append uncovered transitions leaving the end of `path` while there are any."""
    taken = set(path)
    while True:
        state = chart.transitions[path[-1]].target
        step = next(
            (i for i, t in enumerate(chart.transitions) if t.source == state and i not in covered and i not in taken),
            None,
        )
        if step is None:
            return path
        path += (step,)
        taken.add(step)


def loop_free_paths(chart: Statechart, k: int) -> List[Path]:
    """Maximal paths from the initial state with at most `k` transitions and no repeated state."""
    paths: List[Path] = []

    def walk(state: str, path: Path, visited: Tuple[str, ...]) -> None:
        extended = False
        if len(path) < k:
            for index, t in enumerate(chart.transitions):
                if t.source == state and t.target not in visited:
                    extended = True
                    walk(t.target, path + (index,), visited + (t.target,))
        if not extended and path:
            paths.append(path)

    walk(chart.initial, (), (chart.initial,))
    return paths


# --- skeletons --------------------------------------------------------------------------


class _SetupBuilder:
    """Setup objects with fresh, default-initialized collaborators for object-typed slots."""

    def __init__(self, model: Model) -> None:
        self.model = model
        self.objects: List[ObjectDecl] = []
        self._counts: Dict[str, int] = {}

    def concrete(self, cls: str) -> str:
        for candidate in [cls] + [c.name for c in descendants(self.model, cls)]:
            if not is_abstract_class(self.model, candidate):
                return candidate
        raise DerivationError("unsatisfiable-setup", f"no concrete class can stand in for '{cls}'")

    def add(self, cls: str, name: Optional[str] = None, chain: Tuple[str, ...] = ()) -> str:
        concrete = self.concrete(cls)
        if concrete in chain:
            raise DerivationError("unsatisfiable-setup", f"'{concrete}' needs an object of its own class to exist")
        if name is None:
            self._counts[concrete] = self._counts.get(concrete, 0) + 1
            name = f"{concrete[:1].lower()}{concrete[1:]}{self._counts[concrete]}"
        inits = []
        for attr in effective_attributes(self.model, concrete):
            if attr.type not in PRIMITIVE_TYPES:
                inits.append((attr.name, Var(self.add(attr.type, chain=chain + (concrete,)))))
        self.objects.append(ObjectDecl(name, concrete, tuple(inits)))
        return name

    def argument(self, type_name: str) -> Expr:
        if type_name in _DEFAULT_LITERALS:
            return _DEFAULT_LITERALS[type_name]
        return Var(self.add(type_name))


def _skeleton(model: Model, cls: str, chart: Statechart, name: str, path: Path) -> Tuple[TestCase, Dict[int, List[str]]]:
    builder = _SetupBuilder(model)
    builder.add(cls, SUBJECT)
    subject = len(builder.objects) - 1
    items: List[TriggerCall] = []
    notes: Dict[int, List[str]] = {}
    for position, index in enumerate(path):
        transition = chart.transitions[index]
        found = find_method(model, cls, transition.trigger)
        params = found[1].params if found else ()
        args = tuple(builder.argument(p.type) for p in params)
        if transition.guard is not None:
            notes[position] = [f"guard: {print_expr(transition.guard)}"]
        items.append(TriggerCall(MethodCall(Var(SUBJECT), transition.trigger, args)))
    final = chart.transitions[path[-1]].target if path else chart.initial
    # subject first, then collaborators in creation order
    objects = (builder.objects[subject],) + tuple(o for i, o in enumerate(builder.objects) if i != subject)
    test = TestCase(
        name=name,
        category="unit",
        setup=Setup(objects),
        driver=Driver(None, tuple(items)),
        oracle=Oracle(None, (InState(Var(SUBJECT), final),)),
    )
    return test, notes


def derive_tests(model: Model, cls: str, criterion: str, k: Optional[int] = None) -> DerivedSuite:
    if criterion not in CRITERIA:
        raise DerivationError("unknown-criterion", f"criterion must be one of {', '.join(CRITERIA)}")
    if model.class_named(cls) is None:
        raise DerivationError("unknown-class", f"class '{cls}' is not declared")
    found = effective_statechart(model, cls)
    if found is None:
        raise DerivationError("no-statechart", f"'{cls}' has no statechart")
    if is_abstract_class(model, cls):
        raise DerivationError("abstract-instantiation", f"'{cls}' is abstract and cannot be instantiated")
    chart = found[1]

    warnings: List[str] = []
    for trigger in dict.fromkeys(t.trigger for t in chart.transitions):
        method = find_method(model, cls, trigger)
        if method is not None and not method[1].published:
            warnings.append(f"trigger '{trigger}' is not a published method of {cls}")
    unreachable = unreachable_states(chart)
    if unreachable:
        warnings.append(f"unreachable-states: {', '.join(unreachable)}")

    if criterion == "states":
        paths = _state_cover(chart)
    elif criterion == "transitions":
        paths = _transition_cover(chart)
    else:
        if k is not None and k < 1:
            raise DerivationError("invalid-bound", "path length bound must be at least 1")
        paths = loop_free_paths(chart, k if k is not None else len(chart.states))
    if not paths:
        paths = [()]

    tests: List[TestCase] = []
    notes: Dict[str, Dict[int, List[str]]] = {}
    for number, path in enumerate(paths, start=1):
        name = f"{cls}_{criterion}_{number}"
        test, test_notes = _skeleton(model, cls, chart, name, path)
        tests.append(test)
        if test_notes:
            notes[name] = test_notes
    logger.debug("derived %d skeleton(s) for %s by %s", len(tests), cls, criterion)
    return DerivedSuite(
        cls=cls,
        criterion=criterion,
        suite=TestSuite(tuple(tests)),
        paths=tuple(tuple(chart.transitions[i] for i in path) for path in paths),
        notes=notes,
        unreachable=tuple(unreachable),
        warnings=tuple(warnings),
    )
