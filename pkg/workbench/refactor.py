"""Refactorings with context conditions and test co-transformation.

`check_conditions` decides whether a step is applicable, `apply` performs it
on the model and adapts the test suite, and `apply_script` runs a sequence
of steps atomically. Inputs are never mutated; every result is a fresh tree.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from workbench.ast import (
    KEYWORDS,
    PRIMITIVE_TYPES,
    TESTER,
    AllInstances,
    AssocEnd,
    Assign,
    AttributeDef,
    BinOp,
    CallStmt,
    Checkpoint,
    ClassDef,
    CollOp,
    Expr,
    Foreach,
    If,
    InState,
    InvariantDef,
    Iterate,
    Let,
    LinkStmt,
    MethodCall,
    MethodDef,
    Model,
    Nav,
    Neg,
    New,
    Not,
    ObjectDecl,
    Param,
    PatternObject,
    PullUpAttribute,
    PullUpMethod,
    Refactoring,
    RenameAttribute,
    RenameClass,
    RenameMethod,
    Return,
    SourceLocation,
    Stmt,
    TestCase,
    TestSuite,
    TriggerCall,
    Var,
)
from workbench.errors import RefactorError, ScriptBlocked
from workbench.model import (
    ancestry,
    descendants,
    effective_attributes,
    effective_methods,
    find_method,
    is_abstract_class,
    is_subclass,
    role_info,
    validate_model,
)
from workbench.printer import print_expr, print_step
from workbench.typecheck import Scope, Typer, check_method, element_type, is_class_type, literal_type

logger = logging.getLogger(__name__)

UNCHANGED = "unchanged"
ADAPTED = "adapted"
NEEDS_ATTENTION = "needs-attention"
_DISPOSITION_RANK = {UNCHANGED: 0, ADAPTED: 1, NEEDS_ATTENTION: 2}


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    location: Optional[SourceLocation] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "condition": self.condition,
            "message": self.message,
            "location": str(self.location) if self.location else None,
        }


@dataclass(frozen=True)
class ConditionReport:
    step: Refactoring
    violations: Tuple[Violation, ...] = ()

    @property
    def verdict(self) -> str:
        return "blocked" if self.violations else "applicable"

    @property
    def applicable(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {
            "step": print_step(self.step),
            "verdict": self.verdict,
            "violations": [v.to_dict() for v in self.violations],
        }


@dataclass(frozen=True)
class TestDisposition:
    __test__ = False

    name: str
    disposition: str
    edits: Tuple[str, ...] = ()
    reason: Optional[str] = None
    clone_of: Optional[str] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "disposition": self.disposition,
            "edits": list(self.edits),
            "reason": self.reason,
            "clone_of": self.clone_of,
        }


@dataclass(frozen=True)
class CoTransformReport:
    tests: Tuple[TestDisposition, ...] = ()

    def of(self, name: str) -> Optional[TestDisposition]:
        for entry in self.tests:
            if entry.name == name:
                return entry
        return None

    def to_dict(self) -> Dict[str, object]:
        return {"tests": [t.to_dict() for t in self.tests]}


@dataclass(frozen=True)
class StepOutcome:
    conditions: ConditionReport
    cotransform: Optional[CoTransformReport] = None

    def to_dict(self) -> Dict[str, object]:
        data = self.conditions.to_dict()
        data["cotransform"] = self.cotransform.to_dict() if self.cotransform else None
        return data


@dataclass(frozen=True)
class ScriptResult:
    model: Model
    suite: TestSuite
    steps: Tuple[StepOutcome, ...] = ()

    def dispositions(self) -> Dict[str, TestDisposition]:
        """Per test, the strongest disposition over all steps; edits accumulate."""
        merged: Dict[str, TestDisposition] = {}
        for outcome in self.steps:
            if outcome.cotransform is None:
                continue
            for entry in outcome.cotransform.tests:
                previous = merged.get(entry.name)
                if previous is None:
                    merged[entry.name] = entry
                    continue
                stronger = entry if _DISPOSITION_RANK[entry.disposition] > _DISPOSITION_RANK[previous.disposition] else previous
                merged[entry.name] = dataclasses.replace(
                    stronger,
                    edits=previous.edits + entry.edits,
                    reason=stronger.reason or previous.reason,
                    clone_of=previous.clone_of or entry.clone_of,
                )
        return merged

    def to_dict(self) -> Dict[str, object]:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "tests": [d.to_dict() for d in self.dispositions().values()],
        }


# --- generic tree mapping ---------------------------------------------------------------


def _map_tree(node, fn: Callable):
    """Rebuild `node` bottom-up, applying `fn` to every dataclass node."""
    if isinstance(node, tuple):
        return tuple(_map_tree(item, fn) for item in node)
    if dataclasses.is_dataclass(node) and not isinstance(node, (type, SourceLocation)):
        changes = {}
        for f in dataclasses.fields(node):
            value = getattr(node, f.name)
            mapped = _map_tree(value, fn)
            if mapped is not value:
                changes[f.name] = mapped
        if changes:
            node = dataclasses.replace(node, **changes)
        return fn(node)
    return node


def _replace_class(model: Model, cls: ClassDef) -> Model:
    return dataclasses.replace(model, classes=tuple(cls if c.name == cls.name else c for c in model.classes))


# --- elements -------------------------------------------------------------------------


def _require_class(model: Model, name: str) -> ClassDef:
    cls = model.class_named(name)
    if cls is None:
        raise RefactorError("unknown-element", f"class '{name}' is not declared")
    return cls


def _resolve_elements(model: Model, step: Refactoring) -> None:
    if isinstance(step, PullUpAttribute):
        _require_class(model, step.subclass)
        _require_class(model, step.target)
        if step.attribute not in {a.name for a in effective_attributes(model, step.subclass)}:
            raise RefactorError("unknown-element", f"'{step.subclass}' has no attribute '{step.attribute}'")
    elif isinstance(step, PullUpMethod):
        sub = _require_class(model, step.subclass)
        _require_class(model, step.target)
        if sub.own_method(step.method) is None:
            raise RefactorError("unknown-element", f"'{step.subclass}' declares no method '{step.method}'")
    elif isinstance(step, RenameAttribute):
        cls = _require_class(model, step.cls)
        if cls.own_attribute(step.old) is None:
            raise RefactorError("unknown-element", f"'{step.cls}' declares no attribute '{step.old}'")
    elif isinstance(step, RenameMethod):
        cls = _require_class(model, step.cls)
        if cls.own_method(step.old) is None:
            raise RefactorError("unknown-element", f"'{step.cls}' declares no method '{step.old}'")
    elif isinstance(step, RenameClass):
        _require_class(model, step.old)
    else:
        raise RefactorError("unknown-element", f"not a refactoring: {step!r}")


# --- context conditions -------------------------------------------------------------------


def _family(model: Model, name: str) -> List[str]:
    return [name] + [c.name for c in descendants(model, name)]


def _instantiated(model: Model, suite: TestSuite, cls: str) -> bool:
    if any(obj.cls == cls for test in suite.tests for obj in test.setup.objects):
        return True
    found = [False]

    def visit(node):
        if isinstance(node, New) and node.cls == cls:
            found[0] = True
        return node

    _map_tree(model.classes, visit)
    return found[0]


class _Conditions:
    def __init__(self, model: Model, suite: TestSuite, step: Refactoring) -> None:
        self.model = model
        self.suite = suite
        self.step = step
        self.violations: List[Violation] = []

    def add(self, condition: str, message: str) -> None:
        self.violations.append(Violation(condition, message, self.step.loc))

    def direct_superclass(self, sub: str, target: str) -> None:
        if self.model.class_named(sub).superclass != target:
            self.add("P1", f"'{target}' is not the direct superclass of '{sub}'")

    def pull_up_attribute(self, step: PullUpAttribute) -> None:
        model = self.model
        self.direct_superclass(step.subclass, step.target)
        attr_type = next(a.type for a in effective_attributes(model, step.subclass) if a.name == step.attribute)
        owner = next(c for c in ancestry(model, step.subclass) if c.own_attribute(step.attribute) is not None)
        if owner.name != step.subclass and is_subclass(model, step.target, owner.name):
            self.add("C1", f"'{step.target}' already has an attribute '{step.attribute}' (from '{owner.name}')")
        siblings = [
            c for c in descendants(model, step.target)
            if c.own_attribute(step.attribute) is not None and c.name != step.subclass
        ]
        if siblings and not step.merge:
            listed = ", ".join(c.name for c in siblings)
            self.add("C1", f"other subclasses of '{step.target}' already declare '{step.attribute}': {listed}")
        if step.merge:
            for sibling in siblings:
                other = sibling.own_attribute(step.attribute).type
                if other != attr_type:
                    self.add(
                        "C2",
                        f"'{sibling.name}.{step.attribute}' is {other} but '{step.subclass}.{step.attribute}' is {attr_type}",
                    )
        for name in _family(model, step.target):
            if role_info(model, name, step.attribute) is not None:
                self.add("C1", f"'{name}' navigates a role named '{step.attribute}'")
                break
        if attr_type not in PRIMITIVE_TYPES:
            self.add("D1", f"'{step.attribute}' is {attr_type}; only primitive attributes can be pulled up with a default")
            return
        for value in (step.default,) + tuple(step.clones):
            if isinstance(value, Var) or literal_type(value.value) != attr_type:
                self.add("D1", f"value {print_expr(value)} is not a {attr_type}")

    def pull_up_method(self, step: PullUpMethod) -> None:
        model = self.model
        self.direct_superclass(step.subclass, step.target)
        if step.variant == "factor":
            self.add(
                "M1",
                f"factoring is manual: extract the parts of '{step.method}' shared by the subclasses of "
                f"'{step.target}' into a new method of '{step.subclass}', pull that method up with variant "
                "override, then make each subclass body call it",
            )
            return
        moved = model.class_named(step.subclass).own_method(step.method)
        target = model.class_named(step.target)
        if target.own_method(step.method) is not None:
            self.add("C4", f"'{step.target}' already declares '{step.method}'")
            return
        inherited = find_method(model, target.superclass, step.method) if target.superclass else None
        if inherited is not None and inherited[1].signature != moved.signature:
            self.add("C4", f"'{step.method}' conflicts with the signature declared in '{inherited[0].name}'")
        elif inherited is not None and step.variant == "override":
            self.add(
                "C4",
                f"'{step.target}' would dispatch '{step.method}' to the moved body instead of '{inherited[0].name}'",
            )
        subtree = set(_family(model, step.subclass))
        for cls in descendants(model, step.target):
            if cls.name in subtree:
                continue
            own = cls.own_method(step.method)
            if own is not None and own.signature != moved.signature:
                self.add("C4", f"'{cls.name}.{step.method}' has a different signature")
            resolved = find_method(model, cls.name, step.method)
            if inherited is not None and resolved is not None and resolved[0].name == inherited[0].name:
                self.add("C4", f"'{cls.name}' would dispatch '{step.method}' to the moved body instead of '{inherited[0].name}'")

        if step.variant == "abstract":
            below = set(c.name for c in descendants(model, step.target))
            for cls in descendants(model, step.target):
                if is_abstract_class(model, cls.name):
                    continue
                resolved = find_method(model, cls.name, step.method)
                if resolved is None or resolved[0].name not in below:
                    self.add("C5", f"concrete class '{cls.name}' does not declare '{step.method}'")
            if not is_abstract_class(model, step.target) and _instantiated(model, self.suite, step.target):
                self.add("C5", f"'{step.target}' would become abstract but is instantiated")
            return

        after = _pull_up_method_model(model, step)
        reported: Set[str] = set()
        for finding in check_method(after, step.target, moved):
            key = finding.feature or finding.message
            if key in reported:
                continue
            reported.add(key)
            self.add("C3", f"body of '{step.method}' at '{step.target}': {finding.message}")

    def _name_ok(self, new: str) -> None:
        if new in KEYWORDS:
            self.add("C6", f"'{new}' is a reserved word")

    def rename_attribute(self, step: RenameAttribute) -> None:
        model = self.model
        self._name_ok(step.new)
        if step.new == step.old:
            self.add("C6", f"'{step.old}' is already the name")
            return
        for name in _family(model, step.cls):
            if step.new in {a.name for a in effective_attributes(model, name)}:
                self.add("C6", f"'{name}' already has an attribute '{step.new}'")
                break
        for name in _family(model, step.cls):
            if role_info(model, name, step.new) is not None:
                self.add("C6", f"'{name}' navigates a role named '{step.new}'")
                break

    def rename_method(self, step: RenameMethod) -> None:
        model = self.model
        self._name_ok(step.new)
        if step.new == step.old:
            self.add("C6", f"'{step.old}' is already the name")
            return
        cls = model.class_named(step.cls)
        overridden = find_method(model, cls.superclass, step.old) if cls.superclass else None
        if overridden is not None:
            self.add("C6", f"'{step.cls}.{step.old}' overrides '{overridden[0].name}.{step.old}'; rename it there")
        for name in _family(model, step.cls):
            if step.new in effective_methods(model, name):
                self.add("C6", f"'{name}' already has a method '{step.new}'")
                break

    def rename_class(self, step: RenameClass) -> None:
        self._name_ok(step.new)
        if step.new == step.old:
            self.add("C6", f"'{step.old}' is already the name")
        elif self.model.class_named(step.new) is not None:
            self.add("C6", f"class '{step.new}' already exists")
        elif step.new in PRIMITIVE_TYPES or step.new == TESTER:
            self.add("C6", f"'{step.new}' cannot name a class")

    def run(self) -> ConditionReport:
        step = self.step
        if isinstance(step, PullUpAttribute):
            self.pull_up_attribute(step)
        elif isinstance(step, PullUpMethod):
            self.pull_up_method(step)
        elif isinstance(step, RenameAttribute):
            self.rename_attribute(step)
        elif isinstance(step, RenameMethod):
            self.rename_method(step)
        else:
            self.rename_class(step)
        return ConditionReport(step, tuple(self.violations))


def check_conditions(model: Model, suite: TestSuite, step: Refactoring) -> ConditionReport:
    _resolve_elements(model, step)
    report = _Conditions(model, suite, step).run()
    logger.debug("%s: %s", print_step(step), report.verdict)
    return report


# --- model transformations ------------------------------------------------------------


def _pull_up_attribute_model(model: Model, step: PullUpAttribute) -> Model:
    declaration: Optional[AttributeDef] = None
    for cls in ancestry(model, step.subclass):
        declaration = cls.own_attribute(step.attribute)
        if declaration is not None:
            break
    family = {c.name for c in descendants(model, step.target)}
    classes = []
    for cls in model.classes:
        if cls.name in family and cls.own_attribute(step.attribute) is not None:
            cls = dataclasses.replace(cls, attributes=tuple(a for a in cls.attributes if a.name != step.attribute))
        elif cls.name == step.target:
            cls = dataclasses.replace(cls, attributes=cls.attributes + (declaration,))
        classes.append(cls)
    return dataclasses.replace(model, classes=tuple(classes))


def _pull_up_method_model(model: Model, step: PullUpMethod) -> Model:
    sub = model.class_named(step.subclass)
    moved = sub.own_method(step.method)
    target = model.class_named(step.target)
    if step.variant == "abstract":
        signature = dataclasses.replace(moved, body=None, abstract=True)
        return _replace_class(model, dataclasses.replace(target, methods=target.methods + (signature,)))
    model = _replace_class(model, dataclasses.replace(sub, methods=tuple(m for m in sub.methods if m.name != step.method)))
    return _replace_class(model, dataclasses.replace(target, methods=target.methods + (moved,)))


class _RenameRewriter:
    """Rewrites references to one attribute or method, typing each receiver against the old model."""

    def __init__(self, model: Model, kind: str, cls: str, old: str, new: str) -> None:
        self.model = model
        self.kind = kind
        self.cls = cls
        self.old = old
        self.new = new
        self.typer = Typer(model)
        self.count = 0

    def _owned(self, type_name: Optional[str]) -> bool:
        return is_class_type(type_name) and self.model.class_named(type_name) is not None and is_subclass(
            self.model, type_name, self.cls
        )

    def _type(self, expr: Expr, scope: Scope) -> Optional[str]:
        return self.typer.expr(expr, scope, pure=False)

    def expr(self, expr: Expr, scope: Scope) -> Expr:
        if isinstance(expr, Nav):
            source = self.expr(expr.source, scope)
            name = expr.name
            if self.kind == "attr" and name == self.old and self._owned(self._type(expr.source, scope)):
                name = self.new
                self.count += 1
            return dataclasses.replace(expr, source=source, name=name)
        if isinstance(expr, MethodCall):
            return self.call(expr, scope)
        if isinstance(expr, Iterate):
            element = element_type(self._type(expr.source, scope)) or self._type(expr.source, scope)
            inner = scope.with_var(expr.var, element)
            return dataclasses.replace(expr, source=self.expr(expr.source, scope), body=self.expr(expr.body, inner))
        if isinstance(expr, BinOp):
            return dataclasses.replace(expr, left=self.expr(expr.left, scope), right=self.expr(expr.right, scope))
        if isinstance(expr, (Not, Neg)):
            return dataclasses.replace(expr, operand=self.expr(expr.operand, scope))
        if isinstance(expr, InState):
            return dataclasses.replace(expr, source=self.expr(expr.source, scope))
        if isinstance(expr, CollOp):
            return dataclasses.replace(
                expr, source=self.expr(expr.source, scope), args=tuple(self.expr(a, scope) for a in expr.args)
            )
        return expr

    def call(self, expr: MethodCall, scope: Scope) -> MethodCall:
        method = expr.method
        if self.kind == "method" and method == self.old and self._owned(self._type(expr.target, scope)):
            method = self.new
            self.count += 1
        return dataclasses.replace(
            expr,
            target=self.expr(expr.target, scope),
            method=method,
            args=tuple(self.expr(a, scope) for a in expr.args),
        )

    def init_name(self, cls: str, name: str) -> str:
        if self.kind == "attr" and name == self.old and self._owned(cls):
            self.count += 1
            return self.new
        return name

    def block(self, stmts: Sequence[Stmt], scope: Scope) -> Tuple[Stmt, ...]:
        return tuple(self.stmt(s, scope) for s in stmts)

    def stmt(self, stmt: Stmt, scope: Scope) -> Stmt:
        if isinstance(stmt, Assign):
            attr = stmt.attr
            if self.kind == "attr" and attr == self.old and self._owned(self._type(stmt.target, scope)):
                attr = self.new
                self.count += 1
            return dataclasses.replace(
                stmt, target=self.expr(stmt.target, scope), attr=attr, value=self.expr(stmt.value, scope)
            )
        if isinstance(stmt, Let):
            rewritten = dataclasses.replace(stmt, value=self.expr(stmt.value, scope))
            scope.vars[stmt.name] = self._type(stmt.value, scope)
            return rewritten
        if isinstance(stmt, CallStmt):
            rewritten = dataclasses.replace(stmt, call=self.call(stmt.call, scope))
            if stmt.bind is not None:
                scope.vars[stmt.bind] = self.typer.call(stmt.call, scope, pure=False, needs_value=False)
            return rewritten
        if isinstance(stmt, New):
            inits = tuple((self.init_name(stmt.cls, n), self.expr(v, scope)) for n, v in stmt.inits)
            scope.vars[stmt.name] = stmt.cls
            return dataclasses.replace(stmt, inits=inits)
        if isinstance(stmt, LinkStmt):
            return dataclasses.replace(stmt, source=self.expr(stmt.source, scope), value=self.expr(stmt.value, scope))
        if isinstance(stmt, Return):
            return dataclasses.replace(stmt, value=self.expr(stmt.value, scope))
        if isinstance(stmt, If):
            return dataclasses.replace(
                stmt,
                cond=self.expr(stmt.cond, scope),
                then=self.block(stmt.then, scope.child()),
                orelse=self.block(stmt.orelse, scope.child()) if stmt.orelse is not None else None,
            )
        if isinstance(stmt, Foreach):
            source_type = self._type(stmt.source, scope)
            inner = scope.with_var(stmt.var, element_type(source_type) or source_type)
            return dataclasses.replace(stmt, source=self.expr(stmt.source, scope), body=self.block(stmt.body, inner))
        raise TypeError(f"not a statement: {stmt!r}")

    # -- whole trees ---------------------------------------------------------------------

    def method(self, owner: str, method: MethodDef) -> MethodDef:
        name = method.name
        if self.kind == "method" and name == self.old and is_subclass(self.model, owner, self.cls):
            name = self.new
            self.count += 1
        body = method.body
        if body is not None:
            body = self.block(body, Scope(owner, {p.name: p.type for p in method.params}))
        return dataclasses.replace(method, name=name, body=body)

    def klass(self, cls: ClassDef) -> ClassDef:
        attributes = cls.attributes
        if self.kind == "attr" and cls.name == self.cls:
            attributes = tuple(dataclasses.replace(a, name=self.new) if a.name == self.old else a for a in attributes)
        chart = cls.statechart
        if chart is not None:
            transitions = []
            for t in chart.transitions:
                trigger = t.trigger
                if self.kind == "method" and trigger == self.old and is_subclass(self.model, cls.name, self.cls):
                    trigger = self.new
                    self.count += 1
                found = find_method(self.model, cls.name, t.trigger)
                params = {p.name: p.type for p in found[1].params} if found else {}
                guard = self.expr(t.guard, Scope(cls.name, params)) if t.guard is not None else None
                transitions.append(dataclasses.replace(t, trigger=trigger, guard=guard))
            chart = dataclasses.replace(chart, transitions=tuple(transitions))
        methods = tuple(self.method(cls.name, m) for m in cls.methods)
        return dataclasses.replace(cls, attributes=attributes, methods=methods, statechart=chart)

    def model_tree(self) -> Model:
        invariants = tuple(
            dataclasses.replace(inv, expr=self.expr(inv.expr, Scope(inv.context, {}))) for inv in self.model.invariants
        )
        return dataclasses.replace(
            self.model, classes=tuple(self.klass(c) for c in self.model.classes), invariants=invariants
        )

    def test(self, test: TestCase) -> TestCase:
        names = {o.name: o.cls for o in test.setup.objects}
        objects = tuple(
            dataclasses.replace(o, inits=tuple((self.init_name(o.cls, n), v) for n, v in o.inits))
            for o in test.setup.objects
        )
        items = []
        for item in test.driver.items:
            scope = Scope(None, names)
            if isinstance(item, TriggerCall):
                items.append(dataclasses.replace(item, call=self.call(item.call, scope)))
            elif isinstance(item, Checkpoint):
                items.append(dataclasses.replace(item, expr=self.expr(item.expr, scope)))
            else:
                method = item.method
                receiver = names.get(item.receiver)
                if self.kind == "method" and method == self.old and self._owned(receiver):
                    method = self.new
                    self.count += 1
                items.append(dataclasses.replace(item, method=method, args=tuple(self.expr(a, scope) for a in item.args)))
        oracle = test.oracle
        pattern = oracle.pattern
        variables = dict(names)
        if pattern is not None:
            variables.update({o.name: o.cls for o in pattern.objects})
            pattern = dataclasses.replace(
                pattern,
                objects=tuple(
                    dataclasses.replace(o, constraints=tuple((self.init_name(o.cls, n), v) for n, v in o.constraints))
                    for o in pattern.objects
                ),
            )
        assertions = tuple(self.expr(a, Scope(None, variables)) for a in oracle.assertions)
        return dataclasses.replace(
            test,
            setup=dataclasses.replace(test.setup, objects=objects),
            driver=dataclasses.replace(test.driver, items=tuple(items)),
            oracle=dataclasses.replace(oracle, pattern=pattern, assertions=assertions),
        )


def _rename_class_tree(node, old: str, new: str):
    def rename(n):
        if isinstance(n, ClassDef):
            return dataclasses.replace(
                n,
                name=new if n.name == old else n.name,
                superclass=new if n.superclass == old else n.superclass,
            )
        if isinstance(n, MethodDef) and n.return_type == old:
            return dataclasses.replace(n, return_type=new)
        if isinstance(n, (AttributeDef, Param)) and n.type == old:
            return dataclasses.replace(n, type=new)
        if isinstance(n, (New, AllInstances, ObjectDecl, PatternObject)) and n.cls == old:
            return dataclasses.replace(n, cls=new)
        if isinstance(n, AssocEnd) and n.cls == old:
            return dataclasses.replace(n, cls=new)
        if isinstance(n, InvariantDef) and n.context == old:
            return dataclasses.replace(n, context=new)
        return n

    return _map_tree(node, rename)


# --- test co-transformation ---------------------------------------------------------------


def _disposition(name: str, edits: List[str], attention: Optional[str] = None, clone_of: Optional[str] = None) -> TestDisposition:
    if attention:
        return TestDisposition(name, NEEDS_ATTENTION, tuple(edits), attention, clone_of)
    if edits:
        return TestDisposition(name, ADAPTED, tuple(edits), None, clone_of)
    return TestDisposition(name, UNCHANGED)


def _clone_names(taken: Set[str], base: str, count: int) -> List[str]:
    names: List[str] = []
    n = 2
    while len(names) < count:
        candidate = f"{base}_{n}"
        if candidate not in taken:
            names.append(candidate)
            taken.add(candidate)
        n += 1
    return names


def _cotransform_pull_up_attribute(model: Model, suite: TestSuite, step: PullUpAttribute) -> Tuple[TestSuite, CoTransformReport]:
    gaining = {
        name for name in _family(model, step.target)
        if step.attribute not in {a.name for a in effective_attributes(model, name)}
    }
    taken = {t.name for t in suite.tests}
    tests: List[TestCase] = []
    report: List[TestDisposition] = []
    for test in suite.tests:
        edits: List[str] = []
        added: List[int] = []
        objects = []
        for index, obj in enumerate(test.setup.objects):
            if obj.cls in gaining and all(n != step.attribute for n, _ in obj.inits):
                obj = dataclasses.replace(obj, inits=obj.inits + ((step.attribute, step.default),))
                added.append(index)
                edits.append(f"setup {obj.name}: {step.attribute} = {print_expr(step.default)}")
            objects.append(obj)
        attention = None
        # Parsed suites cannot reach this: the typechecker already rejects a pattern
        # constraint on an attribute the class lacks. Suites built in code can.
        if test.oracle.pattern is not None:
            for pattern_obj in test.oracle.pattern.objects:
                if pattern_obj.cls in gaining and any(n == step.attribute for n, _ in pattern_obj.constraints):
                    attention = f"pattern object '{pattern_obj.name}' constrains '{step.attribute}' on a class that gains it"
                    break
        adapted = dataclasses.replace(test, setup=dataclasses.replace(test.setup, objects=tuple(objects)))
        tests.append(adapted)
        report.append(_disposition(test.name, edits, attention))
        if not edits or attention or test.category == "acceptance" or not step.clones:
            continue
        for value, name in zip(step.clones, _clone_names(taken, test.name, len(step.clones))):
            cloned = tuple(
                dataclasses.replace(o, inits=o.inits[:-1] + ((step.attribute, value),)) if i in added else o
                for i, o in enumerate(objects)
            )
            tests.append(dataclasses.replace(adapted, name=name, setup=dataclasses.replace(test.setup, objects=cloned)))
            report.append(
                _disposition(name, [f"clone of {test.name} with {step.attribute} = {print_expr(value)}"], clone_of=test.name)
            )
    return TestSuite(tuple(tests)), CoTransformReport(tuple(report))


def _cotransform_rewritten(suite: TestSuite, rewrite: Callable[[TestCase], TestCase], edit: str) -> Tuple[TestSuite, CoTransformReport]:
    tests: List[TestCase] = []
    report: List[TestDisposition] = []
    for test in suite.tests:
        new = rewrite(test)
        tests.append(new)
        report.append(_disposition(test.name, [edit] if new != test else []))
    return TestSuite(tuple(tests)), CoTransformReport(tuple(report))


def _unchanged(suite: TestSuite) -> CoTransformReport:
    return CoTransformReport(tuple(TestDisposition(t.name, UNCHANGED) for t in suite.tests))


# --- application --------------------------------------------------------------------------


def _transform(model: Model, suite: TestSuite, step: Refactoring) -> Tuple[Model, TestSuite, CoTransformReport]:
    if isinstance(step, PullUpAttribute):
        new_suite, report = _cotransform_pull_up_attribute(model, suite, step)
        return _pull_up_attribute_model(model, step), new_suite, report
    if isinstance(step, PullUpMethod):
        return _pull_up_method_model(model, step), suite, _unchanged(suite)
    if isinstance(step, RenameClass):
        new_model = _rename_class_tree(model, step.old, step.new)
        new_suite, report = _cotransform_rewritten(
            suite, lambda t: _rename_class_tree(t, step.old, step.new), f"class {step.old} renamed to {step.new}"
        )
        return new_model, new_suite, report
    if isinstance(step, RenameAttribute):
        kind, cls, what = "attr", step.cls, "attribute"
    else:
        kind, cls, what = "method", step.cls, "method"
    new_model = _RenameRewriter(model, kind, cls, step.old, step.new).model_tree()
    tests_rewriter = _RenameRewriter(model, kind, cls, step.old, step.new)
    new_suite, report = _cotransform_rewritten(
        suite, tests_rewriter.test, f"{what} {cls}.{step.old} renamed to {step.new}"
    )
    return new_model, new_suite, report


def _checked_transform(model: Model, suite: TestSuite, step: Refactoring) -> Tuple[Model, TestSuite, CoTransformReport]:
    new_model, new_suite, report = _transform(model, suite, step)
    after = validate_model(new_model)
    if not after.clean and validate_model(model).clean:
        raise RefactorError(
            "ill-formed-result",
            f"{print_step(step)} would leave the model ill-formed: " + "; ".join(str(f) for f in after.findings),
            after,
        )
    return new_model, new_suite, report


def apply(model: Model, suite: TestSuite, step: Refactoring) -> Tuple[Model, TestSuite, CoTransformReport]:
    conditions = check_conditions(model, suite, step)
    if not conditions.applicable:
        raise RefactorError(
            "blocked-refactoring",
            f"{print_step(step)} is blocked by {', '.join(v.condition for v in conditions.violations)}",
            conditions,
        )
    new_model, new_suite, report = _checked_transform(model, suite, step)
    logger.debug("applied %s", print_step(step))
    return new_model, new_suite, report


def apply_script(model: Model, suite: TestSuite, steps: Sequence[Refactoring]) -> ScriptResult:
    """Apply all steps in order, or none: a blocked step raises `ScriptBlocked`."""
    current_model, current_suite = model, suite
    outcomes: List[StepOutcome] = []
    for index, step in enumerate(steps, start=1):
        conditions = check_conditions(current_model, current_suite, step)
        if not conditions.applicable:
            outcomes.append(StepOutcome(conditions))
            raise ScriptBlocked(
                "blocked-at-step",
                f"step {index} ({print_step(step)}) is blocked by "
                + ", ".join(f"{v.condition}: {v.message}" for v in conditions.violations),
                None,
                index,
                outcomes,
            )
        current_model, current_suite, report = _checked_transform(current_model, current_suite, step)
        outcomes.append(StepOutcome(conditions, report))
    return ScriptResult(current_model, current_suite, tuple(outcomes))
