"""Parse models, test suites and refactoring scripts.

Parsing is done by lark (LALR) on the grammar in ``grammar.lark``. When a
file does not parse, it is split into top-level items and each item is
parsed on its own, so one broken item yields one diagnostic and the rest of
the file is still checked.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError
from lark.lexer import PatternStr

from workbench.ast import (
    COLLECTION_OPS,
    ITERATOR_OPS,
    AllInstances,
    AssocDef,
    AssocEnd,
    Assign,
    AttributeDef,
    BinOp,
    BoolLit,
    CallStmt,
    Checkpoint,
    ClassDef,
    CollOp,
    Driver,
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
    ObjectDecl,
    ObjectPattern,
    Oracle,
    Param,
    PatternObject,
    PullUpAttribute,
    PullUpMethod,
    Refactoring,
    RenameAttribute,
    RenameClass,
    RenameMethod,
    Return,
    SelfRef,
    Setup,
    SourceLocation,
    Statechart,
    StrLit,
    TestCase,
    TestSuite,
    Transition,
    TriggerCall,
    Var,
)
from workbench.errors import SourceError, UsageError

logger = logging.getLogger(__name__)

_STARTS = ["model_file", "test_file", "script_file", "ocl"]
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class ParseDiagnostic:
    location: SourceLocation
    message: str
    expected: Tuple[str, ...] = ()
    code: str = "syntax-error"

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@lru_cache(maxsize=None)
def _lark() -> Lark:
    return Lark.open(
        "grammar.lark",
        rel_to=__file__,
        parser="lalr",
        lexer="basic",
        start=_STARTS,
        propagate_positions=True,
        maybe_placeholders=True,
    )


class _Malformed(Exception):
    """Well-formed token stream that still is not a valid construct."""

    def __init__(self, line: Optional[int], column: Optional[int], message: str) -> None:
        super().__init__(message)
        self.line = line
        self.column = column
        self.message = message


def _unescape(token: str) -> str:
    body = token[1:-1]
    out: List[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _opt(value):
    return tuple(value) if value else ()


@v_args(meta=True)
class _Builder(Transformer):
    def __init__(self, filename: str) -> None:
        super().__init__()
        self.filename = filename

    def _loc(self, meta) -> Optional[SourceLocation]:
        if getattr(meta, "empty", True):
            return None
        return SourceLocation(self.filename, meta.line, meta.column)

    @staticmethod
    def _fail(meta, message: str) -> _Malformed:
        if getattr(meta, "empty", True):
            return _Malformed(None, None, message)
        return _Malformed(meta.line, meta.column, message)

    # models

    def model_file(self, meta, items):
        return Model(
            classes=tuple(i for i in items if isinstance(i, ClassDef)),
            associations=tuple(i for i in items if isinstance(i, AssocDef)),
            invariants=tuple(i for i in items if isinstance(i, InvariantDef)),
        )

    def published(self, meta, children):
        return True

    def abstract(self, meta, children):
        return True

    def class_def(self, meta, children):
        name, superclass, published, *members = children
        charts = [m for m in members if isinstance(m, Statechart)]
        if len(charts) > 1:
            raise self._fail(meta, f"class '{name}' declares more than one statechart")
        return ClassDef(
            name=str(name),
            superclass=str(superclass) if superclass else None,
            published=bool(published),
            attributes=tuple(m for m in members if isinstance(m, AttributeDef)),
            methods=tuple(m for m in members if isinstance(m, MethodDef)),
            statechart=charts[0] if charts else None,
            loc=self._loc(meta),
        )

    def attr_def(self, meta, children):
        name, type_name = children
        return AttributeDef(str(name), str(type_name), self._loc(meta))

    def method_def(self, meta, children):
        published, abstract, name, params, return_type, body = children
        return MethodDef(
            name=str(name),
            params=_opt(params),
            return_type=str(return_type) if return_type else None,
            body=body,
            published=bool(published),
            abstract=bool(abstract),
            loc=self._loc(meta),
        )

    def params(self, meta, children):
        return list(children)

    def param(self, meta, children):
        name, type_name = children
        return Param(str(name), str(type_name), self._loc(meta))

    def statechart(self, meta, children):
        initial, *rest = children
        return Statechart(
            initial=str(initial),
            states=tuple(s for s in rest if isinstance(s, str)),
            transitions=tuple(t for t in rest if isinstance(t, Transition)),
            loc=self._loc(meta),
        )

    def state_decl(self, meta, children):
        return str(children[0])

    def transition(self, meta, children):
        source, target, trigger, guard = children
        return Transition(str(source), str(target), str(trigger), guard, self._loc(meta))

    def assoc_def(self, meta, children):
        name, left_cls, left_role, left_mult, right_mult, right_cls, right_role = children
        loc = self._loc(meta)
        return AssocDef(
            str(name),
            AssocEnd(str(left_cls), str(left_role), left_mult, loc),
            AssocEnd(str(right_cls), str(right_role), right_mult, loc),
            loc,
        )

    def mult(self, meta, children):
        token = children[0]
        if token.type == "INT" and str(token) != "1":
            raise _Malformed(token.line, token.column, f"multiplicity must be 1, 0..1 or *, not {token}")
        return str(token)

    def invariant_def(self, meta, children):
        name, context, expr = children
        return InvariantDef(str(name), str(context), expr, self._loc(meta))

    # statements

    def block(self, meta, children):
        return tuple(children)

    def expr_stmt(self, meta, children):
        expr = children[0]
        if not isinstance(expr, MethodCall):
            raise self._fail(meta, "expected a method call, assignment or declaration statement")
        return CallStmt(expr, None, self._loc(meta))

    def assign_stmt(self, meta, children):
        lhs, value = children
        if isinstance(lhs, Nav):
            return Assign(lhs.source, lhs.name, value, self._loc(meta))
        if isinstance(lhs, Var):
            if isinstance(value, MethodCall):
                return CallStmt(value, lhs.name, self._loc(meta))
            return Let(lhs.name, value, self._loc(meta))
        raise self._fail(meta, "only a local name or an attribute can be assigned")

    def new_stmt(self, meta, children):
        lhs, cls, inits = children
        if not isinstance(lhs, Var):
            raise self._fail(meta, "a created object must be bound to a local name")
        return New(lhs.name, str(cls), _opt(inits), self._loc(meta))

    def link_stmt(self, meta, children):
        lhs, op, value = children
        if not isinstance(lhs, Nav):
            raise self._fail(meta, f"'{op}' needs a role navigation on its left")
        return LinkStmt(lhs.source, lhs.name, str(op), value, self._loc(meta))

    def return_stmt(self, meta, children):
        return Return(children[0], self._loc(meta))

    def if_stmt(self, meta, children):
        cond, then, orelse = children
        return If(cond, then, orelse, self._loc(meta))

    def foreach_stmt(self, meta, children):
        var, source, body = children
        return Foreach(str(var), source, body, self._loc(meta))

    def inits(self, meta, children):
        return list(children)

    def init(self, meta, children):
        name, value = children
        return (str(name), value)

    # OCL

    def implies_op(self, meta, children):
        return BinOp("implies", children[0], children[1], self._loc(meta))

    def or_op(self, meta, children):
        return BinOp("or", children[0], children[1], self._loc(meta))

    def and_op(self, meta, children):
        return BinOp("and", children[0], children[1], self._loc(meta))

    def compare(self, meta, children):
        left, op, right = children
        return BinOp(str(op), left, right, self._loc(meta))

    def arith(self, meta, children):
        left, op, right = children
        return BinOp(str(op), left, right, self._loc(meta))

    def not_op(self, meta, children):
        return Not(children[0], self._loc(meta))

    def neg(self, meta, children):
        return Neg(children[-1], self._loc(meta))

    def nav(self, meta, children):
        source, name = children
        return Nav(source, str(name), self._loc(meta))

    def call(self, meta, children):
        target, name, args = children
        args = _opt(args)
        if name == "oclInState":
            if len(args) != 1 or not isinstance(args[0], Var):
                raise self._fail(meta, "oclInState takes one state name")
            return InState(target, args[0].name, self._loc(meta))
        if name == "allInstances" and isinstance(target, Var) and not args:
            return AllInstances(target.name, self._loc(meta))
        return MethodCall(target, str(name), args, self._loc(meta))

    def coll_op(self, meta, children):
        source, op, args = children
        if op not in COLLECTION_OPS:
            raise self._fail(meta, f"unknown collection operation '{op}'")
        return CollOp(source, str(op), _opt(args), self._loc(meta))

    def iterate(self, meta, children):
        source, op, var, body = children
        if op not in ITERATOR_OPS:
            raise self._fail(meta, f"unknown iterator '{op}'")
        return Iterate(source, str(op), str(var), body, self._loc(meta))

    def args(self, meta, children):
        return list(children)

    def int_lit(self, meta, children):
        return IntLit(int(children[0]), self._loc(meta))

    def neg_int_lit(self, meta, children):
        return IntLit(-int(children[-1]), self._loc(meta))

    def str_lit(self, meta, children):
        return StrLit(_unescape(children[0]), self._loc(meta))

    def true_lit(self, meta, children):
        return BoolLit(True, self._loc(meta))

    def false_lit(self, meta, children):
        return BoolLit(False, self._loc(meta))

    def self_ref(self, meta, children):
        return SelfRef(self._loc(meta))

    def var(self, meta, children):
        return Var(str(children[0]), self._loc(meta))

    # tests

    def test_file(self, meta, children):
        return TestSuite(tuple(children))

    def test_case(self, meta, children):
        category, name, setup, driver, oracle = children
        return TestCase(str(name), category, setup, driver, oracle, self._loc(meta))

    def category(self, meta, children):
        return str(children[0])

    def setup(self, meta, children):
        return Setup(
            objects=tuple(c for c in children if isinstance(c, ObjectDecl)),
            links=tuple(c for c in children if isinstance(c, LinkDecl)),
        )

    def object_decl(self, meta, children):
        name, cls, inits = children
        return ObjectDecl(str(name), str(cls), _opt(inits), self._loc(meta))

    def link_decl(self, meta, children):
        source, role, op, target = children
        if op != "+=":
            raise self._fail(meta, "links in object diagrams are declared with '+='")
        return LinkDecl(str(source), str(role), str(target), self._loc(meta))

    def value_inits(self, meta, children):
        return list(children)

    def value_init(self, meta, children):
        name, value = children
        return (str(name), value)

    def driver(self, meta, children):
        mode, *items = children
        return Driver(mode, tuple(items))

    def driver_mode(self, meta, children):
        return str(children[0])

    def trigger(self, meta, children):
        expr = children[0]
        if not isinstance(expr, MethodCall):
            raise self._fail(meta, "a driver step must be a method call")
        return TriggerCall(expr, self._loc(meta))

    def expect(self, meta, children):
        sender, receiver, method, args = children
        return ExpectedMessage(str(sender), str(receiver), str(method), _opt(args), self._loc(meta))

    def check(self, meta, children):
        return Checkpoint(children[0], self._loc(meta))

    def oracle(self, meta, children):
        pattern, *assertions = children
        return Oracle(pattern, tuple(assertions))

    def pattern(self, meta, children):
        return ObjectPattern(
            objects=tuple(c for c in children if isinstance(c, PatternObject)),
            links=tuple(c for c in children if isinstance(c, LinkDecl)),
        )

    def pattern_object(self, meta, children):
        name, cls, constraints = children
        return PatternObject(str(name), str(cls), _opt(constraints), self._loc(meta))

    def assertion(self, meta, children):
        return children[0]

    # scripts

    def script_file(self, meta, children):
        return list(children)

    def merge(self, meta, children):
        return True

    def clones(self, meta, children):
        return list(children)

    def pull_up_attr(self, meta, children):
        subclass, attribute, target, default, merge, clones = children
        return PullUpAttribute(
            str(subclass), str(attribute), str(target), default, bool(merge), _opt(clones), self._loc(meta)
        )

    def pull_up_method(self, meta, children):
        subclass, method, target, variant = children
        return PullUpMethod(str(subclass), str(method), str(target), variant or "override", self._loc(meta))

    def variant(self, meta, children):
        return str(children[0])

    def rename_attr(self, meta, children):
        cls, old, new = children
        return RenameAttribute(str(cls), str(old), str(new), self._loc(meta))

    def rename_method(self, meta, children):
        cls, old, new = children
        return RenameMethod(str(cls), str(old), str(new), self._loc(meta))

    def rename_class(self, meta, children):
        old, new = children
        return RenameClass(str(old), str(new), self._loc(meta))


# --- diagnostics --------------------------------------------------------------------


def _clamp(text: str, filename: str, line: Optional[int], column: Optional[int]) -> SourceLocation:
    lines = text.split("\n")
    if not line or line < 1:
        line = len(lines)
    line = min(line, len(lines))
    width = len(lines[line - 1])
    if not column or column < 1:
        column = width + 1
    return SourceLocation(filename, line, min(column, width + 1))


def _describe_terminal(name: str) -> str:
    try:
        pattern = _lark().get_terminal(name).pattern
    except KeyError:
        return name.lower()
    if isinstance(pattern, PatternStr):
        return f"'{pattern.value}'"
    return name.lower()


def _diagnose(exc: Exception, text: str, filename: str) -> ParseDiagnostic:
    if isinstance(exc, _Malformed):
        return ParseDiagnostic(_clamp(text, filename, exc.line, exc.column), exc.message)
    if isinstance(exc, UnexpectedToken):
        expected = tuple(sorted(_describe_terminal(t) for t in exc.expected))
        if exc.token.type == "$END":
            what = "end of input"
            location = _clamp(text, filename, None, None)
        else:
            what = f"'{exc.token}'"
            location = _clamp(text, filename, exc.line, exc.column)
        message = f"unexpected {what}"
        if expected:
            message += f"; expected {', '.join(expected)}"
        return ParseDiagnostic(location, message, expected)
    if isinstance(exc, UnexpectedCharacters):
        return ParseDiagnostic(
            _clamp(text, filename, exc.line, exc.column), f"unexpected character {exc.char!r}"
        )
    if isinstance(exc, UnexpectedInput):
        return ParseDiagnostic(_clamp(text, filename, getattr(exc, "line", None), getattr(exc, "column", None)), str(exc))
    raise exc


# --- chunked recovery ----------------------------------------------------------------


_ITEM_KEYWORDS = {
    "model_file": ("class", "assoc", "invariant"),
    "test_file": ("test",),
}


def _is_ident(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def _chunks(text: str, start: str) -> List[Tuple[int, int]]:
    """Offsets of top-level items; scripts split after each top-level ';'."""
    keywords = _ITEM_KEYWORDS.get(start, ())
    bounds: List[int] = [0]
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            i += 1
            while i < n and text[i] not in '"\n':
                i += 2 if text[i] == "\\" else 1
            i += 1
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            i = n if end < 0 else end
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth = max(depth - 1, 0)
        elif ch == ";" and start == "script_file" and depth == 0:
            bounds.append(i + 1)
        elif depth == 0 and (i == 0 or not _is_ident(text[i - 1])):
            for word in keywords:
                after = i + len(word)
                if text.startswith(word, i) and (after >= n or not _is_ident(text[after])):
                    if i > bounds[-1]:
                        bounds.append(i)
                    break
        i += 1
    bounds.append(n)
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if text[a:b].strip()]


def _padded(text: str, begin: int, end: int) -> str:
    line = text.count("\n", 0, begin)
    column = begin - (text.rfind("\n", 0, begin) + 1)
    return "\n" * line + " " * column + text[begin:end]


def _parse(text: str, start: str, filename: str):
    parser = _lark()
    try:
        return _Builder(filename).transform(parser.parse(text, start=start))
    except VisitError as exc:
        raise exc.orig_exc


def _parse_with_recovery(text: str, start: str, filename: str):
    try:
        return _parse(text, start, filename)
    except (UnexpectedInput, _Malformed) as first:
        whole = _diagnose(first, text, filename)

    diagnostics: List[ParseDiagnostic] = []
    for begin, end in _chunks(text, start):
        try:
            _parse(_padded(text, begin, end), start, filename)
        except (UnexpectedInput, _Malformed) as exc:
            diagnostics.append(_diagnose(exc, text, filename))
    if not diagnostics:
        diagnostics.append(whole)
    logger.debug("%s: %d syntax diagnostic(s)", filename, len(diagnostics))
    raise SourceError("parse-error", f"{filename}: {len(diagnostics)} syntax error(s)", diagnostics)


# --- public entry points ---------------------------------------------------------------


def parse_ocl(text: str, filename: str = "<ocl>") -> Expr:
    return _parse_with_recovery(text, "ocl", filename)


def parse_model(text: str, filename: str = "<model>") -> Model:
    """Syntax only; `validate_model` does the well-formedness checks."""
    return _parse_with_recovery(text, "model_file", filename)


def _resolution_error(findings, filename: str) -> SourceError:
    diagnostics = [
        ParseDiagnostic(
            f.location or SourceLocation(filename, 1, 1),
            f"{f.rule}: {f.message}",
            code=f.rule,
        )
        for f in findings
    ]
    return SourceError("resolve-error", f"{filename}: {len(diagnostics)} unresolved name(s)", diagnostics)


def parse_tests(text: str, model: Model, filename: str = "<tests>") -> TestSuite:
    from workbench.typecheck import check_suite

    suite = _parse_with_recovery(text, "test_file", filename)
    findings = check_suite(model, suite)
    if findings:
        raise _resolution_error(findings, filename)
    return suite


def parse_refactorings(text: str, model: Model, filename: str = "<script>") -> List[Refactoring]:
    steps = _parse_with_recovery(text, "script_file", filename)
    findings = _resolve_steps(model, steps)
    if findings:
        raise _resolution_error(findings, filename)
    return steps


# --- script name resolution -------------------------------------------------------------


class _Shape:
    """Names declared by one class, tracked while replaying a script."""

    def __init__(self, superclass: Optional[str], attributes: Set[str], methods: Set[str]) -> None:
        self.superclass = superclass
        self.attributes = attributes
        self.methods = methods


def _chain(shapes: Dict[str, _Shape], name: str) -> List[str]:
    chain: List[str] = []
    while name in shapes and name not in chain:
        chain.append(name)
        name = shapes[name].superclass
    return chain


def _resolve_steps(model: Model, steps: Sequence[Refactoring]):
    """Check that each step names existing elements of the model as the script leaves it."""
    from workbench.model import Finding

    shapes = {
        cls.name: _Shape(cls.superclass, {a.name for a in cls.attributes}, {m.name for m in cls.methods})
        for cls in model.classes
    }
    findings = []

    def missing(step, message):
        findings.append(Finding("error", step.loc, "unknown-element", message))

    def has(kind: str, cls: str, name: str) -> bool:
        return any(name in getattr(shapes[c], kind) for c in _chain(shapes, cls))

    for step in steps:
        if isinstance(step, RenameClass):
            if step.old not in shapes:
                missing(step, f"class '{step.old}' is not declared")
                continue
            shapes[step.new] = shapes.pop(step.old)
            for shape in shapes.values():
                if shape.superclass == step.old:
                    shape.superclass = step.new
            continue
        cls = step.cls if isinstance(step, (RenameAttribute, RenameMethod)) else step.subclass
        unknown = [c for c in (cls, getattr(step, "target", None)) if c is not None and c not in shapes]
        if unknown:
            missing(step, f"class '{unknown[0]}' is not declared")
            continue
        if isinstance(step, PullUpAttribute):
            if not has("attributes", cls, step.attribute):
                missing(step, f"'{cls}' has no attribute '{step.attribute}'")
                continue
            for name in shapes:
                if step.target in _chain(shapes, name):
                    shapes[name].attributes.discard(step.attribute)
            shapes[step.target].attributes.add(step.attribute)
        elif isinstance(step, PullUpMethod):
            if step.method not in shapes[cls].methods:
                missing(step, f"'{cls}' declares no method '{step.method}'")
                continue
            if step.variant != "abstract":
                shapes[cls].methods.discard(step.method)
            shapes[step.target].methods.add(step.method)
        elif isinstance(step, RenameAttribute):
            if step.old not in shapes[cls].attributes:
                missing(step, f"'{cls}' declares no attribute '{step.old}'")
                continue
            shapes[cls].attributes.discard(step.old)
            shapes[cls].attributes.add(step.new)
        elif isinstance(step, RenameMethod):
            if step.old not in shapes[cls].methods:
                missing(step, f"'{cls}' declares no method '{step.old}'")
                continue
            for name, shape in shapes.items():
                if cls in _chain(shapes, name) and step.old in shape.methods:
                    shape.methods.discard(step.old)
                    shape.methods.add(step.new)
    return findings


# --- files ---------------------------------------------------------------------------


def read_source(path: str) -> str:
    file_path = Path(path)
    if not file_path.is_file():
        raise UsageError("missing-file", f"{path}: no such file")
    return file_path.read_text(encoding="utf-8")


def load_model(path: str) -> Model:
    return parse_model(read_source(path), path)


def load_suites(model: Model, paths: Sequence[str]) -> List[Tuple[str, TestSuite]]:
    """Parse each test file; all diagnostics from all files are raised together."""
    loaded: List[Tuple[str, TestSuite]] = []
    diagnostics: List[ParseDiagnostic] = []
    for path in paths:
        try:
            loaded.append((path, parse_tests(read_source(path), model, path)))
        except SourceError as exc:
            diagnostics.extend(exc.details or [])
    if diagnostics:
        raise SourceError("parse-error", f"{len(diagnostics)} problem(s) in test files", diagnostics)
    return loaded


def merge_suites(suites: Sequence[Tuple[str, TestSuite]]) -> TestSuite:
    """One suite in file order; a test name may appear in only one file."""
    first: Dict[str, str] = {}
    diagnostics: List[ParseDiagnostic] = []
    for path, suite in suites:
        for test in suite.tests:
            if test.name in first:
                diagnostics.append(
                    ParseDiagnostic(
                        test.loc or SourceLocation(path, 1, 1),
                        f"duplicate-test: test '{test.name}' is also declared in {first[test.name]}",
                        code="duplicate-test",
                    )
                )
            else:
                first[test.name] = path
    if diagnostics:
        raise SourceError("resolve-error", f"{len(diagnostics)} test name(s) declared in more than one file", diagnostics)
    return TestSuite(tuple(test for _, suite in suites for test in suite.tests))


def load_script(model: Model, path: str) -> List[Refactoring]:
    return parse_refactorings(read_source(path), model, path)


FILE_KINDS = {".agm": "model_file", ".agt": "test_file", ".agr": "script_file"}


def file_kind(path: str) -> str:
    suffix = Path(path).suffix
    if suffix not in FILE_KINDS:
        raise UsageError("unknown-file-kind", f"{path}: expected one of {', '.join(sorted(FILE_KINDS))}")
    return FILE_KINDS[suffix]


def parse_syntax(text: str, path: str):
    """Parse by file extension without resolving names: Model, TestSuite or a list of steps."""
    return _parse_with_recovery(text, file_kind(path), path)
