"""Static typing of OCL expressions, method bodies, guards, invariants and tests.

Types are plain strings: ``Int``, ``Bool``, ``String``, a class name, or
``Set(C)``. An expression whose type cannot be determined types as ``None``
after a finding has been recorded, so one mistake yields one finding.
"""
from __future__ import annotations

import logging
from typing import Dict, Iterator, List, Optional, Set

from workbench.ast import (
    ARITH_OPS,
    BOOL_OPS,
    COLLECTION_OPS,
    EQUALITY_OPS,
    ITERATOR_OPS,
    KEYWORDS,
    ORDER_OPS,
    PRIMITIVE_TYPES,
    TESTER,
    AllInstances,
    Assign,
    BinOp,
    BoolLit,
    CallStmt,
    Checkpoint,
    CollOp,
    ExpectedMessage,
    Expr,
    Foreach,
    If,
    InState,
    IntLit,
    Iterate,
    Let,
    LinkDecl,
    LinkStmt,
    MethodCall,
    MethodDef,
    Model,
    Nav,
    Neg,
    New,
    Not,
    Return,
    SelfRef,
    SourceLocation,
    Stmt,
    StrLit,
    TestCase,
    TestSuite,
    TriggerCall,
    Var,
)
from workbench.model import (
    Finding,
    attribute_type,
    descendants,
    effective_attributes,
    effective_statechart,
    find_method,
    is_abstract_class,
    is_subclass,
    role_info,
)

logger = logging.getLogger(__name__)


def set_of(cls: str) -> str:
    return f"Set({cls})"


def element_type(type_name: Optional[str]) -> Optional[str]:
    if type_name and type_name.startswith("Set(") and type_name.endswith(")"):
        return type_name[4:-1]
    return None


def is_class_type(type_name: Optional[str]) -> bool:
    return bool(type_name) and type_name not in PRIMITIVE_TYPES and element_type(type_name) is None


def literal_type(value: object) -> str:
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    return "String"


# --- tree walking ---------------------------------------------------------------


def children(expr: Expr) -> List[Expr]:
    if isinstance(expr, (Nav, InState)):
        return [expr.source]
    if isinstance(expr, MethodCall):
        return [expr.target, *expr.args]
    if isinstance(expr, BinOp):
        return [expr.left, expr.right]
    if isinstance(expr, (Not, Neg)):
        return [expr.operand]
    if isinstance(expr, CollOp):
        return [expr.source, *expr.args]
    if isinstance(expr, Iterate):
        return [expr.source, expr.body]
    return []


def subexpressions(expr: Expr) -> Iterator[Expr]:
    """Pre-order walk over `expr` and everything below it."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_vars(expr: Expr) -> Set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Iterate):
        return free_vars(expr.source) | (free_vars(expr.body) - {expr.var})
    result: Set[str] = set()
    for child in children(expr):
        result |= free_vars(child)
    return result


# --- scopes -----------------------------------------------------------------------


class Scope:
    """Variables visible at a point; blocks get a child copy."""

    def __init__(self, self_type: Optional[str] = None, variables: Optional[Dict[str, str]] = None) -> None:
        self.self_type = self_type
        self.vars: Dict[str, str] = dict(variables or {})

    def child(self) -> "Scope":
        return Scope(self.self_type, self.vars)

    def with_var(self, name: str, type_name: str) -> "Scope":
        scope = self.child()
        scope.vars[name] = type_name
        return scope


class Typer:
    def __init__(self, model: Model) -> None:
        self.model = model
        self.findings: List[Finding] = []

    def error(self, rule: str, message: str, location: Optional[SourceLocation], feature: Optional[str] = None) -> None:
        self.findings.append(Finding("error", location, rule, message, feature))

    # -- compatibility ---------------------------------------------------------

    def assignable(self, actual: Optional[str], expected: Optional[str]) -> bool:
        if actual is None or expected is None or actual == expected:
            return True
        if is_class_type(actual) and is_class_type(expected):
            return is_subclass(self.model, actual, expected)
        inner_a, inner_e = element_type(actual), element_type(expected)
        if inner_a and inner_e:
            return is_subclass(self.model, inner_a, inner_e)
        return False

    def comparable(self, left: Optional[str], right: Optional[str]) -> bool:
        return self.assignable(left, right) or self.assignable(right, left)

    def _collection_element(self, type_name: Optional[str]) -> Optional[str]:
        inner = element_type(type_name)
        if inner:
            return inner
        if is_class_type(type_name):
            return type_name
        return None

    # -- expressions -------------------------------------------------------------

    def expr(self, expr: Expr, scope: Scope, pure: bool = True) -> Optional[str]:
        if isinstance(expr, IntLit):
            return "Int"
        if isinstance(expr, BoolLit):
            return "Bool"
        if isinstance(expr, StrLit):
            return "String"
        if isinstance(expr, SelfRef):
            if scope.self_type is None:
                self.error("unknown-name", "'self' is not available here", expr.loc)
            return scope.self_type
        if isinstance(expr, Var):
            if expr.name not in scope.vars:
                self.error("unknown-name", f"'{expr.name}' is not bound", expr.loc)
                return None
            return scope.vars[expr.name]
        if isinstance(expr, Nav):
            return self._nav(expr, scope, pure)
        if isinstance(expr, MethodCall):
            return self.call(expr, scope, pure=pure, needs_value=True)
        if isinstance(expr, BinOp):
            return self._binop(expr, scope, pure)
        if isinstance(expr, Not):
            self.expect(expr.operand, "Bool", scope, pure)
            return "Bool"
        if isinstance(expr, Neg):
            self.expect(expr.operand, "Int", scope, pure)
            return "Int"
        if isinstance(expr, CollOp):
            return self._collop(expr, scope, pure)
        if isinstance(expr, Iterate):
            return self._iterate(expr, scope, pure)
        if isinstance(expr, AllInstances):
            if self.model.class_named(expr.cls) is None:
                self.error("unknown-class", f"class '{expr.cls}' is not declared", expr.loc)
                return None
            return set_of(expr.cls)
        if isinstance(expr, InState):
            return self._in_state(expr, scope, pure)
        raise TypeError(f"not an expression: {expr!r}")

    def expect(self, expr: Expr, expected: str, scope: Scope, pure: bool = True) -> Optional[str]:
        actual = self.expr(expr, scope, pure)
        if not self.assignable(actual, expected):
            self.error("type-error", f"expected {expected}, found {actual}", expr.loc)
        return actual

    def _nav(self, expr: Nav, scope: Scope, pure: bool) -> Optional[str]:
        source = self.expr(expr.source, scope, pure)
        if source is None:
            return None
        if not is_class_type(source):
            self.error("type-error", f"cannot navigate '.{expr.name}' on {source}", expr.loc)
            return None
        attr = attribute_type(self.model, source, expr.name)
        if attr is not None:
            return attr
        info = role_info(self.model, source, expr.name)
        if info is not None:
            return info.target if info.single else set_of(info.target)
        self.error("unknown-feature", f"'{source}' has no attribute or role '{expr.name}'", expr.loc, expr.name)
        return None

    def call(self, expr: MethodCall, scope: Scope, pure: bool, needs_value: bool) -> Optional[str]:
        target = self.expr(expr.target, scope, pure)
        arg_types = [self.expr(arg, scope, pure) for arg in expr.args]
        if target is None:
            return None
        if not is_class_type(target):
            self.error("type-error", f"cannot call '{expr.method}' on {target}", expr.loc)
            return None
        found = find_method(self.model, target, expr.method)
        if found is None:
            self.error("unknown-feature", f"'{target}' has no method '{expr.method}'", expr.loc, expr.method)
            return None
        owner, method = found
        if len(method.params) != len(expr.args):
            self.error(
                "arity-mismatch",
                f"'{owner.name}.{method.name}' takes {len(method.params)} argument(s), got {len(expr.args)}",
                expr.loc,
            )
        else:
            for param, arg, arg_type in zip(method.params, expr.args, arg_types):
                if not self.assignable(arg_type, param.type):
                    self.error("type-error", f"argument '{param.name}' expects {param.type}, found {arg_type}", arg.loc)
        if pure and not self.is_query_family(target, method):
            self.error("impure-call", f"'{owner.name}.{method.name}' is not a query method", expr.loc)
        if needs_value and method.return_type is None:
            self.error("type-error", f"'{owner.name}.{method.name}' returns no value", expr.loc)
        return method.return_type

    def is_query_family(self, static_type: str, method: MethodDef) -> bool:
        """True when every body that dispatch can reach from `static_type` is a query."""
        if not (method.is_query or method.abstract):
            return False
        for cls in descendants(self.model, static_type):
            override = cls.own_method(method.name)
            if override is not None and not override.is_query:
                return False
        return True

    def _binop(self, expr: BinOp, scope: Scope, pure: bool) -> Optional[str]:
        if expr.op in ARITH_OPS:
            self.expect(expr.left, "Int", scope, pure)
            self.expect(expr.right, "Int", scope, pure)
            return "Int"
        if expr.op in ORDER_OPS:
            self.expect(expr.left, "Int", scope, pure)
            self.expect(expr.right, "Int", scope, pure)
            return "Bool"
        if expr.op in BOOL_OPS:
            self.expect(expr.left, "Bool", scope, pure)
            self.expect(expr.right, "Bool", scope, pure)
            return "Bool"
        if expr.op in EQUALITY_OPS:
            left = self.expr(expr.left, scope, pure)
            right = self.expr(expr.right, scope, pure)
            if not self.comparable(left, right):
                self.error("type-error", f"cannot compare {left} with {right}", expr.loc)
            return "Bool"
        raise ValueError(f"unknown operator {expr.op!r}")

    def _collop(self, expr: CollOp, scope: Scope, pure: bool) -> Optional[str]:
        source = self.expr(expr.source, scope, pure)
        arg_types = [self.expr(arg, scope, pure) for arg in expr.args]
        if expr.op not in COLLECTION_OPS:
            self.error("unknown-feature", f"unknown collection operation '{expr.op}'", expr.loc)
            return None
        wanted = 1 if expr.op == "includes" else 0
        if len(expr.args) != wanted:
            self.error("arity-mismatch", f"'->{expr.op}' takes {wanted} argument(s)", expr.loc)
        element = self._collection_element(source)
        if source is not None and element is None:
            self.error("type-error", f"'->{expr.op}' needs a collection, found {source}", expr.loc)
        if expr.op == "size":
            return "Int"
        if expr.op == "includes" and arg_types and element is not None:
            if not self.comparable(arg_types[0], element):
                self.error("type-error", f"'->includes' of {arg_types[0]} in a set of {element}", expr.loc)
        return "Bool"

    def _iterate(self, expr: Iterate, scope: Scope, pure: bool) -> Optional[str]:
        source = self.expr(expr.source, scope, pure)
        element = self._collection_element(source)
        if source is not None and element is None:
            self.error("type-error", f"'->{expr.op}' needs a collection, found {source}", expr.loc)
        if expr.op not in ITERATOR_OPS:
            self.error("unknown-feature", f"unknown iterator '{expr.op}'", expr.loc)
            return None
        inner = scope.with_var(expr.var, element)
        if element is None:
            self.expr(expr.body, inner, pure)
        else:
            self.expect(expr.body, "Bool", inner, pure)
        if expr.op == "select":
            return set_of(element) if element else None
        return "Bool"

    def _in_state(self, expr: InState, scope: Scope, pure: bool) -> Optional[str]:
        source = self.expr(expr.source, scope, pure)
        if source is None:
            return "Bool"
        if not is_class_type(source):
            self.error("type-error", f"'oclInState' needs an object, found {source}", expr.loc)
            return "Bool"
        chart = effective_statechart(self.model, source)
        if chart is None:
            self.error("unknown-state", f"'{source}' has no statechart", expr.loc)
        elif expr.state not in chart[1].states:
            self.error("unknown-state", f"'{source}' has no state '{expr.state}'", expr.loc)
        return "Bool"

    # -- statements ----------------------------------------------------------------

    def _declare(self, name: str, type_name: Optional[str], scope: Scope, location: Optional[SourceLocation]) -> None:
        if name in scope.vars or name == "self":
            self.error("local-reassigned", f"'{name}' is already bound", location)
        scope.vars[name] = type_name

    def block(self, stmts: tuple, scope: Scope, method: Optional[MethodDef]) -> None:
        for stmt in stmts:
            self.stmt(stmt, scope, method)

    def stmt(self, stmt: Stmt, scope: Scope, method: Optional[MethodDef]) -> None:
        if isinstance(stmt, Assign):
            target = self.expr(stmt.target, scope)
            value = self.expr(stmt.value, scope)
            if target is None:
                return
            if not is_class_type(target):
                self.error("type-error", f"cannot assign '.{stmt.attr}' on {target}", stmt.loc)
                return
            attr = attribute_type(self.model, target, stmt.attr)
            if attr is None:
                self.error("unknown-feature", f"'{target}' has no attribute '{stmt.attr}'", stmt.loc, stmt.attr)
            elif not self.assignable(value, attr):
                self.error("type-error", f"'{target}.{stmt.attr}' is {attr}, assigned {value}", stmt.loc)
        elif isinstance(stmt, Let):
            value = self.expr(stmt.value, scope)
            self._declare(stmt.name, value, scope, stmt.loc)
        elif isinstance(stmt, CallStmt):
            value = self.call(stmt.call, scope, pure=False, needs_value=stmt.bind is not None)
            if stmt.bind is not None:
                self._declare(stmt.bind, value, scope, stmt.loc)
        elif isinstance(stmt, New):
            inits = dict()
            for name, value in stmt.inits:
                inits.setdefault(name, []).append(self.expr(value, scope))
            self.instantiation(stmt.cls, inits, stmt.loc)
            self._declare(stmt.name, stmt.cls if self.model.class_named(stmt.cls) else None, scope, stmt.loc)
        elif isinstance(stmt, LinkStmt):
            source = self.expr(stmt.source, scope)
            value = self.expr(stmt.value, scope)
            if source is None:
                return
            info = role_info(self.model, source, stmt.role) if is_class_type(source) else None
            if info is None:
                self.error("unknown-feature", f"{source} has no role '{stmt.role}'", stmt.loc)
            elif not self.assignable(value, info.target):
                self.error("type-error", f"role '{stmt.role}' links {info.target}, found {value}", stmt.loc)
        elif isinstance(stmt, Return):
            value = self.expr(stmt.value, scope)
            expected = method.return_type if method is not None else None
            if expected is None:
                self.error("return-type-mismatch", "return with a value in a method without a return type", stmt.loc)
            elif not self.assignable(value, expected):
                self.error("return-type-mismatch", f"returns {value}, declared {expected}", stmt.loc)
        elif isinstance(stmt, If):
            self.expect(stmt.cond, "Bool", scope)
            self.block(stmt.then, scope.child(), method)
            if stmt.orelse is not None:
                self.block(stmt.orelse, scope.child(), method)
        elif isinstance(stmt, Foreach):
            source = self.expr(stmt.source, scope)
            element = self._collection_element(source)
            if source is not None and element is None:
                self.error("type-error", f"'foreach' needs a collection, found {source}", stmt.loc)
            inner = scope.child()
            self._declare(stmt.var, element, inner, stmt.loc)
            self.block(stmt.body, inner, method)
        else:
            raise TypeError(f"not a statement: {stmt!r}")

    def instantiation(self, cls_name: str, inits: Dict[str, List[Optional[str]]], location: Optional[SourceLocation]) -> None:
        """Check `new C {...}` given the types of the initializers by attribute name."""
        if self.model.class_named(cls_name) is None:
            self.error("unknown-class", f"class '{cls_name}' is not declared", location)
            return
        if is_abstract_class(self.model, cls_name):
            self.error("abstract-instantiation", f"'{cls_name}' is abstract", location)
        for name, types in inits.items():
            if len(types) > 1:
                self.error("duplicate-init", f"'{name}' is initialized more than once", location)
            attr = attribute_type(self.model, cls_name, name)
            if attr is None:
                self.error("unknown-feature", f"'{cls_name}' has no attribute '{name}'", location)
            elif not self.assignable(types[0], attr):
                self.error("type-error", f"'{cls_name}.{name}' is {attr}, initialized with {types[0]}", location)
        for attr in effective_attributes(self.model, cls_name):
            if attr.type not in PRIMITIVE_TYPES and attr.name not in inits:
                self.error(
                    "missing-required-attribute",
                    f"object-typed attribute '{cls_name}.{attr.name}' must be initialized",
                    location,
                )


# --- entry points ---------------------------------------------------------------------


def check_expr(
    model: Model,
    expr: Expr,
    variables: Dict[str, str],
    self_type: Optional[str] = None,
    expected: Optional[str] = None,
) -> List[Finding]:
    typer = Typer(model)
    scope = Scope(self_type, variables)
    if expected is None:
        typer.expr(expr, scope)
    else:
        typer.expect(expr, expected, scope)
    return typer.findings


def static_type(model: Model, expr: Expr, variables: Dict[str, str], self_type: Optional[str] = None) -> Optional[str]:
    return Typer(model).expr(expr, Scope(self_type, variables))


def check_method(model: Model, cls_name: str, method: MethodDef) -> List[Finding]:
    """Type the body of `method` as if it were declared in `cls_name`."""
    typer = Typer(model)
    if method.body is None:
        return []
    scope = Scope(cls_name, {p.name: p.type for p in method.params})
    typer.block(method.body, scope, method)
    return typer.findings


def _known_types(model: Model, method: MethodDef) -> bool:
    types = [p.type for p in method.params] + ([method.return_type] if method.return_type else [])
    return all(t in PRIMITIVE_TYPES or model.class_named(t) is not None for t in types)


def check_model_bodies(model: Model) -> List[Finding]:
    """Type method bodies, statechart guards and invariants."""
    findings: List[Finding] = []
    for cls in model.classes:
        for method in cls.methods:
            if _known_types(model, method):
                findings.extend(check_method(model, cls.name, method))
        if cls.statechart is not None:
            for transition in cls.statechart.transitions:
                if transition.guard is None:
                    continue
                found = find_method(model, cls.name, transition.trigger)
                params = {p.name: p.type for p in found[1].params} if found else {}
                findings.extend(check_expr(model, transition.guard, params, cls.name, "Bool"))
    for inv in model.invariants:
        if model.class_named(inv.context) is not None:
            findings.extend(check_expr(model, inv.expr, {}, inv.context, "Bool"))
    logger.debug("typed model bodies: %d finding(s)", len(findings))
    return findings


# --- tests --------------------------------------------------------------------------


def _literal_kind(typer: Typer, value: Expr, names: Dict[str, str]) -> Optional[str]:
    if isinstance(value, Var):
        if value.name not in names:
            typer.error("unknown-name", f"'{value.name}' is not an object of this test", value.loc)
            return None
        return names[value.name]
    return typer.expr(value, Scope())


def _check_links(typer: Typer, links: tuple, names: Dict[str, str]) -> None:
    for link in links:
        assert isinstance(link, LinkDecl)
        missing = [n for n in (link.source, link.target) if n not in names]
        for name in missing:
            typer.error("unknown-name", f"'{name}' is not an object of this test", link.loc)
        if missing:
            continue
        info = role_info(typer.model, names[link.source], link.role)
        if info is None:
            typer.error("unknown-feature", f"'{names[link.source]}' has no role '{link.role}'", link.loc)
        elif not typer.assignable(names[link.target], info.target):
            typer.error("type-error", f"role '{link.role}' links {info.target}, found {names[link.target]}", link.loc)


def _check_object_name(typer: Typer, name: str, names: Dict[str, str], location: Optional[SourceLocation]) -> None:
    if name in names:
        typer.error("duplicate-object", f"object '{name}' is declared twice", location)
    if name == TESTER or name in KEYWORDS:
        typer.error("reserved-object-name", f"'{name}' cannot name an object", location)


def setup_names(test: TestCase) -> Dict[str, str]:
    return {obj.name: obj.cls for obj in test.setup.objects}


def check_test(model: Model, test: TestCase) -> List[Finding]:
    """Resolve every name a test uses and type its OCL."""
    typer = Typer(model)
    names: Dict[str, str] = {}
    for obj in test.setup.objects:
        _check_object_name(typer, obj.name, names, obj.loc)
        names.setdefault(obj.name, obj.cls)
    for obj in test.setup.objects:
        inits: Dict[str, List[Optional[str]]] = {}
        for attr, value in obj.inits:
            inits.setdefault(attr, []).append(_literal_kind(typer, value, names))
        typer.instantiation(obj.cls, inits, obj.loc)
    known = {n: c for n, c in names.items() if model.class_named(c) is not None}
    _check_links(typer, test.setup.links, known)

    scope = Scope(None, known)
    for item in test.driver.items:
        if isinstance(item, TriggerCall):
            typer.call(item.call, scope, pure=False, needs_value=False)
        elif isinstance(item, Checkpoint):
            typer.expect(item.expr, "Bool", scope)
        elif isinstance(item, ExpectedMessage):
            _check_expected(typer, item, known, scope)

    pattern_names = dict(known)
    pattern = test.oracle.pattern
    if pattern is not None:
        seen: Dict[str, str] = {}
        for obj in pattern.objects:
            if obj.name in seen:
                typer.error("duplicate-object", f"pattern object '{obj.name}' is declared twice", obj.loc)
            if obj.name == TESTER or obj.name in KEYWORDS:
                typer.error("reserved-object-name", f"'{obj.name}' cannot name an object", obj.loc)
            seen[obj.name] = obj.cls
            if model.class_named(obj.cls) is None:
                typer.error("unknown-class", f"class '{obj.cls}' is not declared", obj.loc)
                continue
            if obj.name in known and not is_subclass(model, known[obj.name], obj.cls):
                typer.error("type-error", f"setup object '{obj.name}' is a {known[obj.name]}, not a {obj.cls}", obj.loc)
            pattern_names[obj.name] = obj.cls
        for obj in pattern.objects:
            if model.class_named(obj.cls) is None:
                continue
            for attr, value in obj.constraints:
                declared = attribute_type(model, obj.cls, attr)
                actual = _literal_kind(typer, value, pattern_names)
                if declared is None:
                    typer.error("unknown-feature", f"'{obj.cls}' has no attribute '{attr}'", obj.loc)
                elif not typer.assignable(actual, declared) and not typer.assignable(declared, actual):
                    typer.error("type-error", f"'{obj.cls}.{attr}' is {declared}, constrained with {actual}", obj.loc)
        _check_links(typer, pattern.links, pattern_names)

    oracle_scope = Scope(None, pattern_names)
    for assertion in test.oracle.assertions:
        typer.expect(assertion, "Bool", oracle_scope)
    return typer.findings


def _check_expected(typer: Typer, item: ExpectedMessage, names: Dict[str, str], scope: Scope) -> None:
    if item.sender != TESTER and item.sender not in names:
        typer.error("unknown-name", f"sender '{item.sender}' is not an object of this test", item.loc)
    if item.receiver not in names:
        typer.error("unknown-name", f"receiver '{item.receiver}' is not an object of this test", item.loc)
        return
    found = find_method(typer.model, names[item.receiver], item.method)
    if found is None:
        typer.error("unknown-feature", f"'{names[item.receiver]}' has no method '{item.method}'", item.loc)
        return
    method = found[1]
    if item.args and len(item.args) != len(method.params):
        typer.error("arity-mismatch", f"'{item.method}' takes {len(method.params)} argument(s)", item.loc)
        return
    for param, arg in zip(method.params, item.args):
        actual = typer.expr(arg, scope)
        if not typer.assignable(actual, param.type):
            typer.error("type-error", f"argument '{param.name}' expects {param.type}, found {actual}", arg.loc)


def check_suite(model: Model, suite: TestSuite) -> List[Finding]:
    findings: List[Finding] = []
    seen = set()
    for test in suite.tests:
        if test.name in seen:
            findings.append(Finding("error", test.loc, "duplicate-test", f"test '{test.name}' is declared twice"))
        seen.add(test.name)
        findings.extend(check_test(model, test))
    return findings
