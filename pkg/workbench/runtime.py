"""The interpreter: instantiate object diagrams and execute method calls.

Calls dispatch dynamically, fire statechart transitions before the body runs
and record a trace of nested calls and returns.
"""
from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, MutableMapping, Optional, Sequence, Tuple, Union

from workbench.ast import (
    PRIMITIVE_TYPES,
    Assign,
    Block,
    CallStmt,
    Foreach,
    If,
    Let,
    LinkStmt,
    MethodCall,
    MethodDef,
    Model,
    New,
    Return,
    Setup,
    Stmt,
    Var,
)
from workbench.errors import EvalError, ModelError, RuntimeFault
from workbench.model import effective_attributes, effective_statechart, is_abstract_class, navigable_roles, resolve_method, role_info
from workbench.ocl import Evaluator
from workbench.space import ObjectRef, ObjectSpace, Value

logger = logging.getLogger(__name__)

TYPE_DEFAULTS: Dict[str, Value] = {"Int": 0, "Bool": False, "String": ""}
_FRAMES_PER_CALL = 16


@dataclass(frozen=True)
class Budget:
    max_steps: int = 100000
    max_depth: int = 1000

    def __post_init__(self) -> None:
        if self.max_steps < 1 or self.max_depth < 1:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class CallEvent:
    """`caller` is None when the test driver (TESTER) makes the call."""

    caller: Optional[ObjectRef]
    callee: ObjectRef
    method: str
    args: Tuple[Value, ...] = ()


@dataclass(frozen=True)
class ReturnEvent:
    callee: ObjectRef
    method: str
    value: Optional[Value] = None


TraceEvent = Union[CallEvent, ReturnEvent]


@dataclass(frozen=True)
class FiredTransition:
    cls: str
    source: str
    trigger: str
    target: str


@dataclass
class CallOutcome:
    value: Optional[Value]
    trace: List[TraceEvent] = field(default_factory=list)
    space: Optional[ObjectSpace] = None
    fired: List[FiredTransition] = field(default_factory=list)


class _Returned(Exception):
    def __init__(self, value: Value) -> None:
        super().__init__()
        self.value = value


# --- instantiation ----------------------------------------------------------------


def initial_attributes(model: Model, cls: str, given: Mapping[str, Value]) -> Dict[str, Value]:
    """Explicit values first, then type defaults; object-typed attributes have none."""
    values: Dict[str, Value] = {}
    for attr in effective_attributes(model, cls):
        if attr.name in given:
            values[attr.name] = given[attr.name]
        elif attr.type in PRIMITIVE_TYPES:
            values[attr.name] = TYPE_DEFAULTS[attr.type]
        else:
            raise RuntimeFault(
                "missing-required-attribute", f"object-typed attribute '{cls}.{attr.name}' has no value"
            )
    return values


def _initial_state(model: Model, cls: str) -> Optional[str]:
    chart = effective_statechart(model, cls)
    return chart[1].initial if chart else None


def create_object(space: ObjectSpace, cls: str, given: Mapping[str, Value], name: Optional[str] = None) -> ObjectRef:
    model = space.model
    if model.class_named(cls) is None:
        raise RuntimeFault("unknown-class", f"class '{cls}' is not declared")
    if is_abstract_class(model, cls):
        raise RuntimeFault("abstract-instantiation", f"'{cls}' is abstract")
    return space.create(cls, initial_attributes(model, cls, given), _initial_state(model, cls), name)


def check_multiplicities(space: ObjectSpace) -> List[str]:
    """Upper-bound violations of single-valued ends, one message per object and role."""
    problems: List[str] = []
    for ref in space.refs():
        record = space.get(ref)
        for info in navigable_roles(space.model, record.cls):
            if not info.single:
                continue
            partners = space.partners(ref, info)
            if len(partners) > 1:
                listed = ", ".join(str(p) for p in partners)
                problems.append(
                    f"{ref} ({record.cls}) has {len(partners)} '{info.role}' links ({listed}), multiplicity {info.mult}"
                )
    return problems


def instantiate(model: Model, setup: Setup) -> ObjectSpace:
    space = ObjectSpace(model)
    refs: Dict[str, ObjectRef] = {}
    deferred: List[Tuple[ObjectRef, str, str]] = []
    for decl in setup.objects:
        given: Dict[str, Value] = {}
        placeholders: Dict[str, str] = {}
        for attr, value in decl.inits:
            if isinstance(value, Var):
                placeholders[attr] = value.name
                given[attr] = ObjectRef(0)
            else:
                given[attr] = value.value
        ref = create_object(space, decl.cls, given, decl.name)
        refs[decl.name] = ref
        deferred.extend((ref, attr, target) for attr, target in placeholders.items())
    for ref, attr, target in deferred:
        if target not in refs:
            raise RuntimeFault("unknown-object", f"'{target}' is not a setup object")
        record = space.get(ref)
        if attr in record.attributes:
            record.attributes[attr] = refs[target]
    for link in setup.links:
        source, target = refs.get(link.source), refs.get(link.target)
        if source is None or target is None:
            raise RuntimeFault("unknown-object", f"link {link.source}.{link.role} names an unknown object")
        info = role_info(model, space.get(source).cls, link.role)
        if info is None:
            raise RuntimeFault("unknown-role", f"'{space.get(source).cls}' has no role '{link.role}'")
        space.link(info, source, target)
    problems = check_multiplicities(space)
    if problems:
        raise RuntimeFault("multiplicity-violation", problems[0])
    logger.debug("instantiated %d object(s), %d link(s)", len(space.objects), len(space.links))
    return space


# --- execution ------------------------------------------------------------------------


class Interpreter:
    """Executes calls against one space, mutating it in place."""

    def __init__(self, space: ObjectSpace, budget: Optional[Budget] = None, ignore_unexpected_events: bool = False) -> None:
        self.space = space
        self.model = space.model
        self.budget = budget or Budget()
        self.ignore_unexpected_events = ignore_unexpected_events
        self.evaluator = Evaluator(space, self.budget.max_depth)
        self.trace: List[TraceEvent] = []
        self.fired: List[FiredTransition] = []
        self.steps = 0
        self.depth = 0
        wanted = self.budget.max_depth * _FRAMES_PER_CALL + 1000
        if sys.getrecursionlimit() < wanted:
            sys.setrecursionlimit(wanted)

    def trigger(self, call: MethodCall, env: Mapping[str, Value]) -> Optional[Value]:
        """Evaluate a driver call in `env` and invoke it on behalf of TESTER."""
        target = self.evaluator.eval(call.target, env)
        args = tuple(self.evaluator.eval(arg, env) for arg in call.args)
        if not isinstance(target, ObjectRef):
            raise RuntimeFault("type-error", f"call target of '{call.method}' is not an object")
        return self.invoke(None, target, call.method, args)

    def invoke(self, caller: Optional[ObjectRef], target: ObjectRef, method_name: str, args: Sequence[Value]) -> Optional[Value]:
        try:
            return self._invoke(caller, target, method_name, tuple(args))
        except RecursionError as exc:
            raise RuntimeFault("budget-exhausted", "call nesting exceeds the interpreter stack") from exc

    def _invoke(self, caller: Optional[ObjectRef], target: ObjectRef, method_name: str, args: Tuple[Value, ...]) -> Optional[Value]:
        if self.depth >= self.budget.max_depth:
            raise RuntimeFault("budget-exhausted", f"call depth exceeds {self.budget.max_depth}")
        cls = self.space.get(target).cls
        try:
            method = resolve_method(self.model, cls, method_name)
        except ModelError as exc:
            raise RuntimeFault("no-such-method", exc.message) from exc
        self.trace.append(CallEvent(caller, target, method_name, args))
        if method.body is None:
            raise RuntimeFault("abstract-call", f"'{cls}.{method_name}' resolves to an abstract method")

        env: Dict[str, Value] = {"self": target}
        env.update({p.name: value for p, value in zip(method.params, args)})
        if not self._fire(cls, target, method, env):
            self.trace.append(ReturnEvent(target, method_name, None))
            return None

        self.depth += 1
        try:
            value = self._run_body(method, env)
        finally:
            self.depth -= 1
        self.trace.append(ReturnEvent(target, method_name, value))
        return value

    def _fire(self, cls: str, target: ObjectRef, method: MethodDef, env: Mapping[str, Value]) -> bool:
        """Take the enabled transition for an event method; False when ignored."""
        found = effective_statechart(self.model, cls)
        if found is None:
            return True
        _, chart = found
        if not any(t.trigger == method.name for t in chart.transitions):
            return True
        record = self.space.get(target)
        enabled = [
            t for t in chart.transitions
            if t.source == record.state and t.trigger == method.name
            and (t.guard is None or self.evaluator.eval(t.guard, env) is True)
        ]
        if not enabled:
            if self.ignore_unexpected_events:
                logger.debug("ignored %s.%s in state %s", cls, method.name, record.state)
                return False
            raise RuntimeFault(
                "no-enabled-transition", f"'{method.name}' is not enabled for {target} ({cls}) in state {record.state}"
            )
        if len(enabled) > 1:
            raise RuntimeFault(
                "nondeterministic-statechart",
                f"{len(enabled)} transitions on '{method.name}' are enabled in state {record.state} of {cls}",
            )
        transition = enabled[0]
        record.state = transition.target
        self.fired.append(FiredTransition(cls, transition.source, transition.trigger, transition.target))
        logger.debug("%s %s: %s -> %s", target, method.name, transition.source, transition.target)
        return True

    def _run_body(self, method: MethodDef, env: Dict[str, Value]) -> Optional[Value]:
        try:
            self._block(method.body or (), env)
        except _Returned as done:
            return done.value
        if method.return_type is not None:
            raise RuntimeFault("missing-return", f"'{method.name}' finished without returning a value")
        return None

    def _block(self, stmts: Block, env: MutableMapping[str, Value]) -> None:
        for stmt in stmts:
            self._step()
            self._stmt(stmt, env)

    def _step(self) -> None:
        self.steps += 1
        if self.steps > self.budget.max_steps:
            raise RuntimeFault("budget-exhausted", f"more than {self.budget.max_steps} steps")

    def _object(self, value: Value, what: str) -> ObjectRef:
        if not isinstance(value, ObjectRef):
            raise RuntimeFault("type-error", f"{what} is not an object")
        return value

    def _stmt(self, stmt: Stmt, env: MutableMapping[str, Value]) -> None:
        ev = self.evaluator
        if isinstance(stmt, Assign):
            target = self._object(ev.eval(stmt.target, env), f"target of '.{stmt.attr}'")
            self.space.get(target).attributes[stmt.attr] = ev.eval(stmt.value, env)
        elif isinstance(stmt, Let):
            env[stmt.name] = ev.eval(stmt.value, env)
        elif isinstance(stmt, CallStmt):
            call = stmt.call
            target = self._object(ev.eval(call.target, env), f"target of '{call.method}'")
            args = tuple(ev.eval(arg, env) for arg in call.args)
            caller = env.get("self")
            value = self._invoke(caller if isinstance(caller, ObjectRef) else None, target, call.method, args)
            if stmt.bind is not None:
                env[stmt.bind] = value
        elif isinstance(stmt, New):
            given = {name: ev.eval(value, env) for name, value in stmt.inits}
            env[stmt.name] = create_object(self.space, stmt.cls, given)
        elif isinstance(stmt, LinkStmt):
            source = self._object(ev.eval(stmt.source, env), f"source of '{stmt.role}'")
            partner = self._object(ev.eval(stmt.value, env), f"value linked by '{stmt.role}'")
            info = role_info(self.model, self.space.get(source).cls, stmt.role)
            if info is None:
                raise RuntimeFault("unknown-role", f"'{self.space.get(source).cls}' has no role '{stmt.role}'")
            if stmt.op == "+=":
                self.space.link(info, source, partner)
            else:
                self.space.unlink(info, source, partner)
        elif isinstance(stmt, Return):
            raise _Returned(ev.eval(stmt.value, env))
        elif isinstance(stmt, If):
            cond = ev.eval(stmt.cond, env)
            if cond is True:
                self._block(stmt.then, dict(env))
            elif stmt.orelse is not None:
                self._block(stmt.orelse, dict(env))
        elif isinstance(stmt, Foreach):
            for element in sorted(ev.as_set(stmt.source, env)):
                inner = dict(env)
                inner[stmt.var] = element
                self._block(stmt.body, inner)
        else:
            raise RuntimeFault("type-error", f"cannot execute {type(stmt).__name__}")


def call(
    space: ObjectSpace,
    target: ObjectRef,
    method: str,
    args: Sequence[Value],
    budget: Optional[Budget] = None,
    ignore_unexpected_events: bool = False,
) -> CallOutcome:
    """Run one call from TESTER on a copy of `space`; the input space is untouched.

    Faults raise `RuntimeFault` or `EvalError`; the partial trace is then on the
    exception's `trace` attribute.
    """
    working = space.copy()
    interpreter = Interpreter(working, budget, ignore_unexpected_events)
    try:
        value = interpreter.invoke(None, target, method, args)
    except (RuntimeFault, EvalError) as exc:
        exc.trace = list(interpreter.trace)
        raise
    return CallOutcome(value, interpreter.trace, working, interpreter.fired)
