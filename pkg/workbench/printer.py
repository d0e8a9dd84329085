"""Canonical text for models, test suites and refactoring scripts.

Two-space indentation, one declaration per line, a blank line between
top-level items and exactly one trailing newline. Parsing the output gives
back the printed tree.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

from workbench.ast import (
    AllInstances,
    AssocDef,
    Assign,
    BinOp,
    BoolLit,
    CallStmt,
    Checkpoint,
    ClassDef,
    CollOp,
    ExpectedMessage,
    Expr,
    Foreach,
    If,
    InState,
    IntLit,
    InvariantDef,
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
    PullUpAttribute,
    PullUpMethod,
    Refactoring,
    RenameAttribute,
    RenameClass,
    RenameMethod,
    Return,
    SelfRef,
    Statechart,
    Stmt,
    StrLit,
    TestCase,
    TestSuite,
    TriggerCall,
    Var,
)

INDENT = "  "

# binding strength, loosest first
_PRECEDENCE = {
    "implies": 1,
    "or": 2,
    "and": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
}
_UNARY = 7
_POSTFIX = 8


def quote(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, (Not, Neg)):
        return _UNARY
    return _POSTFIX


def print_expr(expr: Expr, context: int = 0) -> str:
    text = _expr(expr)
    if _precedence(expr) < context:
        return f"({text})"
    return text


def _args(args: Sequence[Expr]) -> str:
    return ", ".join(print_expr(arg) for arg in args)


def _expr(expr: Expr) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, StrLit):
        return quote(expr.value)
    if isinstance(expr, SelfRef):
        return "self"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, BinOp):
        level = _PRECEDENCE[expr.op]
        if expr.op == "implies":
            left, right = level + 1, level
        elif level == 4:
            left, right = level + 1, level + 1
        else:
            left, right = level, level + 1
        return f"{print_expr(expr.left, left)} {expr.op} {print_expr(expr.right, right)}"
    if isinstance(expr, Not):
        return f"not {print_expr(expr.operand, _UNARY)}"
    if isinstance(expr, Neg):
        operand = print_expr(expr.operand, _UNARY)
        if operand.startswith("-"):
            operand = f"({operand})"
        return f"-{operand}"
    if isinstance(expr, Nav):
        return f"{print_expr(expr.source, _POSTFIX)}.{expr.name}"
    if isinstance(expr, MethodCall):
        return f"{print_expr(expr.target, _POSTFIX)}.{expr.method}({_args(expr.args)})"
    if isinstance(expr, CollOp):
        return f"{print_expr(expr.source, _POSTFIX)}->{expr.op}({_args(expr.args)})"
    if isinstance(expr, Iterate):
        return f"{print_expr(expr.source, _POSTFIX)}->{expr.op}({expr.var} | {print_expr(expr.body)})"
    if isinstance(expr, AllInstances):
        return f"{expr.cls}.allInstances()"
    if isinstance(expr, InState):
        return f"{print_expr(expr.source, _POSTFIX)}.oclInState({expr.state})"
    raise TypeError(f"not an expression: {expr!r}")


def _value(value: Expr) -> str:
    """Literal position (setup, pattern, script default): negatives print bare."""
    if isinstance(value, IntLit):
        return str(value.value)
    return print_expr(value)


# --- statements ---------------------------------------------------------------------


def _block(stmts: Sequence[Stmt], depth: int) -> str:
    if not stmts:
        return "{}"
    lines = ["{"]
    for stmt in stmts:
        lines.extend(_stmt(stmt, depth + 1))
    lines.append(INDENT * depth + "}")
    return "\n".join(lines)


def _stmt(stmt: Stmt, depth: int) -> List[str]:
    pad = INDENT * depth
    if isinstance(stmt, Assign):
        return [f"{pad}{print_expr(stmt.target, _POSTFIX)}.{stmt.attr} = {print_expr(stmt.value)};"]
    if isinstance(stmt, Let):
        return [f"{pad}{stmt.name} = {print_expr(stmt.value)};"]
    if isinstance(stmt, CallStmt):
        bind = f"{stmt.bind} = " if stmt.bind is not None else ""
        return [f"{pad}{bind}{print_expr(stmt.call)};"]
    if isinstance(stmt, New):
        inits = ", ".join(f"{name} = {print_expr(value)}" for name, value in stmt.inits)
        return [f"{pad}{stmt.name} = new {stmt.cls} {{{inits}}};"]
    if isinstance(stmt, LinkStmt):
        return [f"{pad}{print_expr(stmt.source, _POSTFIX)}.{stmt.role} {stmt.op} {print_expr(stmt.value)};"]
    if isinstance(stmt, Return):
        return [f"{pad}return {print_expr(stmt.value)};"]
    if isinstance(stmt, If):
        text = f"{pad}if ({print_expr(stmt.cond)}) {_block(stmt.then, depth)}"
        if stmt.orelse is not None:
            text += f" else {_block(stmt.orelse, depth)}"
        return [text]
    if isinstance(stmt, Foreach):
        return [f"{pad}foreach {stmt.var} in {print_expr(stmt.source)} {_block(stmt.body, depth)}"]
    raise TypeError(f"not a statement: {stmt!r}")


# --- models -----------------------------------------------------------------------------


def _method(method: MethodDef) -> str:
    params = ", ".join(f"{p.name}: {p.type}" for p in method.params)
    head = ("published " if method.published else "") + ("abstract " if method.abstract else "")
    text = f"{INDENT}{head}method {method.name}({params})"
    if method.return_type is not None:
        text += f": {method.return_type}"
    if method.body is not None:
        text += f" {_block(method.body, 1)}"
    return text


def _statechart(chart: Statechart) -> List[str]:
    pad = INDENT * 2
    lines = [f"{INDENT}statechart {{", f"{pad}initial {chart.initial};"]
    lines.extend(f"{pad}state {state};" for state in chart.states)
    for t in chart.transitions:
        guard = f" [{print_expr(t.guard)}]" if t.guard is not None else ""
        lines.append(f"{pad}{t.source} -> {t.target} on {t.trigger}{guard};")
    lines.append(f"{INDENT}}}")
    return lines


def _class(cls: ClassDef) -> str:
    head = f"class {cls.name}"
    if cls.superclass:
        head += f" extends {cls.superclass}"
    if cls.published:
        head += " published"
    body: List[str] = [f"{INDENT}attr {a.name}: {a.type}" for a in cls.attributes]
    body.extend(_method(m) for m in cls.methods)
    if cls.statechart is not None:
        body.extend(_statechart(cls.statechart))
    if not body:
        return f"{head} {{}}"
    return "\n".join([f"{head} {{", *body, "}"])


def _assoc(assoc: AssocDef) -> str:
    left, right = assoc.left, assoc.right
    return f"assoc {assoc.name} {left.cls}.{left.role} {left.mult} -- {right.mult} {right.cls}.{right.role}"


def _invariant(inv: InvariantDef) -> str:
    return f"invariant {inv.name} context {inv.context}: {print_expr(inv.expr)}"


def _join(items: Sequence[str]) -> str:
    return "\n\n".join(items) + "\n"


def print_model(model: Model) -> str:
    items = [_class(c) for c in model.classes]
    items.extend(_assoc(a) for a in model.associations)
    items.extend(_invariant(i) for i in model.invariants)
    return _join(items)


# --- tests ----------------------------------------------------------------------------


def _section(name: str, lines: List[str]) -> List[str]:
    if not lines:
        return [f"{INDENT}{name} {{}}"]
    return [f"{INDENT}{name} {{", *lines, f"{INDENT}}}"]


def _inits(pairs) -> str:
    return ", ".join(f"{name} = {_value(value)}" for name, value in pairs)


def _link(link: LinkDecl, pad: str) -> str:
    return f"{pad}link {link.source}.{link.role} += {link.target};"


def _test(test: TestCase, notes: Mapping[int, Sequence[str]]) -> str:
    pad = INDENT * 2
    setup = [f"{pad}{o.name} = new {o.cls} {{{_inits(o.inits)}}};" for o in test.setup.objects]
    setup.extend(_link(link, pad) for link in test.setup.links)

    driver: List[str] = []
    for index, item in enumerate(test.driver.items):
        driver.extend(f"{pad}// {note}" for note in notes.get(index, ()))
        if isinstance(item, TriggerCall):
            driver.append(f"{pad}{print_expr(item.call)};")
        elif isinstance(item, ExpectedMessage):
            driver.append(f"{pad}expect {item.sender} -> {item.receiver} : {item.method}({_args(item.args)});")
        elif isinstance(item, Checkpoint):
            driver.append(f"{pad}check {print_expr(item.expr)};")
    driver_name = f"driver {test.driver.mode}" if test.driver.mode else "driver"

    oracle: List[str] = []
    pattern = test.oracle.pattern
    if pattern is not None:
        inner = INDENT * 3
        rows = [f"{inner}{o.name}: {o.cls} {{{_inits(o.constraints)}}}" for o in pattern.objects]
        rows.extend(_link(link, inner) for link in pattern.links)
        oracle.extend([f"{pad}pattern {{", *rows, f"{pad}}}"] if rows else [f"{pad}pattern {{}}"])
    oracle.extend(f"{pad}assert {print_expr(a)};" for a in test.oracle.assertions)

    lines = [f"test {test.category} {test.name} {{"]
    lines.extend(_section("setup", setup))
    lines.extend(_section(driver_name, driver))
    lines.extend(_section("oracle", oracle))
    lines.append("}")
    return "\n".join(lines)


def print_tests(suite: TestSuite, notes: Optional[Dict[str, Dict[int, List[str]]]] = None) -> str:
    """`notes` maps test name -> driver item index -> comment lines printed above it."""
    notes = notes or {}
    return _join([_test(t, notes.get(t.name, {})) for t in suite.tests])


# --- scripts ----------------------------------------------------------------------------


def print_step(step: Refactoring) -> str:
    if isinstance(step, PullUpAttribute):
        text = f"pull_up_attr {step.subclass}.{step.attribute} -> {step.target} default {_value(step.default)}"
        if step.merge:
            text += " merge"
        if step.clones:
            text += " clone " + ", ".join(_value(v) for v in step.clones)
        return text + ";"
    if isinstance(step, PullUpMethod):
        return f"pull_up_method {step.subclass}.{step.method} -> {step.target} variant {step.variant};"
    if isinstance(step, RenameAttribute):
        return f"rename_attr {step.cls}.{step.old} -> {step.new};"
    if isinstance(step, RenameMethod):
        return f"rename_method {step.cls}.{step.old} -> {step.new};"
    if isinstance(step, RenameClass):
        return f"rename_class {step.old} -> {step.new};"
    raise TypeError(f"not a refactoring: {step!r}")


def print_refactorings(steps: Sequence[Refactoring]) -> str:
    return "\n".join(print_step(s) for s in steps) + "\n"
