"""Abstract syntax for models, test suites and refactoring scripts.

All nodes are frozen dataclasses. Source locations are carried on every node
but excluded from equality, so two trees parsed from differently formatted
text compare equal when their structure is the same.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

PRIMITIVE_TYPES = ("Int", "Bool", "String")
TESTER = "TESTER"


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


def _loc() -> Optional[SourceLocation]:
    return field(default=None, compare=False, repr=False)


# --- OCL expressions -------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class StrLit:
    value: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SelfRef:
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Nav:
    """`source.name`: attribute or role navigation (resolved against the model)."""

    source: "Expr"
    name: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class MethodCall:
    target: "Expr"
    method: str
    args: Tuple["Expr", ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class CollOp:
    """`source->op(args)` for size, isEmpty, notEmpty, includes."""

    source: "Expr"
    op: str
    args: Tuple["Expr", ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Iterate:
    """`source->op(var | body)` for forAll, exists, select."""

    source: "Expr"
    op: str
    var: str
    body: "Expr"
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class AllInstances:
    cls: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class InState:
    source: "Expr"
    state: str
    loc: Optional[SourceLocation] = _loc()


Expr = Union[
    IntLit, BoolLit, StrLit, SelfRef, Var, Nav, MethodCall, BinOp, Not, Neg,
    CollOp, Iterate, AllInstances, InState,
]
Literal = Union[IntLit, BoolLit, StrLit, Var]

ARITH_OPS = ("+", "-", "*", "/")
ORDER_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")
BOOL_OPS = ("and", "or", "implies")
COLLECTION_OPS = ("size", "isEmpty", "notEmpty", "includes")
ITERATOR_OPS = ("forAll", "exists", "select")


# --- action language -------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    """`target.attr = value;`"""

    target: Expr
    attr: str
    value: Expr
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Let:
    """`name = value;` where value is not a method call."""

    name: str
    value: Expr
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class CallStmt:
    """`call;` or `bind = call;` (traced, may have effects)."""

    call: MethodCall
    bind: Optional[str] = None
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class New:
    name: str
    cls: str
    inits: Tuple[Tuple[str, Expr], ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class LinkStmt:
    """`source.role += value;` / `source.role -= value;`"""

    source: Expr
    role: str
    op: str
    value: Expr
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Return:
    value: Expr
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Optional[Tuple["Stmt", ...]] = None
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Foreach:
    var: str
    source: Expr
    body: Tuple["Stmt", ...]
    loc: Optional[SourceLocation] = _loc()


Stmt = Union[Assign, Let, CallStmt, New, LinkStmt, Return, If, Foreach]
Block = Tuple[Stmt, ...]


# --- models ------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeDef:
    name: str
    type: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class MethodDef:
    name: str
    params: Tuple[Param, ...] = ()
    return_type: Optional[str] = None
    body: Optional[Block] = None
    published: bool = False
    abstract: bool = False
    loc: Optional[SourceLocation] = _loc()

    @property
    def signature(self) -> Tuple[Tuple[str, ...], Optional[str]]:
        return tuple(p.type for p in self.params), self.return_type

    @property
    def is_query(self) -> bool:
        """Side-effect-free: the body is exactly one `return expr`."""
        return self.body is not None and len(self.body) == 1 and isinstance(self.body[0], Return)


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    trigger: str
    guard: Optional[Expr] = None
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Statechart:
    initial: str
    states: Tuple[str, ...]
    transitions: Tuple[Transition, ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ClassDef:
    name: str
    superclass: Optional[str] = None
    published: bool = False
    attributes: Tuple[AttributeDef, ...] = ()
    methods: Tuple[MethodDef, ...] = ()
    statechart: Optional[Statechart] = None
    loc: Optional[SourceLocation] = _loc()

    def own_attribute(self, name: str) -> Optional[AttributeDef]:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None

    def own_method(self, name: str) -> Optional[MethodDef]:
        for method in self.methods:
            if method.name == name:
                return method
        return None


@dataclass(frozen=True)
class AssocEnd:
    cls: str
    role: str
    mult: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class AssocDef:
    """`assoc name A.ra mA -- mB B.rb`; `ra` is navigated from B, `rb` from A."""

    name: str
    left: AssocEnd
    right: AssocEnd
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class InvariantDef:
    name: str
    context: str
    expr: Expr
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Model:
    classes: Tuple[ClassDef, ...] = ()
    associations: Tuple[AssocDef, ...] = ()
    invariants: Tuple[InvariantDef, ...] = ()

    def class_named(self, name: str) -> Optional[ClassDef]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def association_named(self, name: str) -> Optional[AssocDef]:
        for assoc in self.associations:
            if assoc.name == name:
                return assoc
        return None


# --- test suites ---------------------------------------------------------------


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    cls: str
    inits: Tuple[Tuple[str, Literal], ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class LinkDecl:
    source: str
    role: str
    target: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Setup:
    objects: Tuple[ObjectDecl, ...] = ()
    links: Tuple[LinkDecl, ...] = ()


@dataclass(frozen=True)
class TriggerCall:
    call: MethodCall
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ExpectedMessage:
    sender: str
    receiver: str
    method: str
    args: Tuple[Expr, ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Checkpoint:
    expr: Expr
    loc: Optional[SourceLocation] = _loc()


DriverItem = Union[TriggerCall, ExpectedMessage, Checkpoint]


@dataclass(frozen=True)
class Driver:
    mode: Optional[str] = None
    items: Tuple[DriverItem, ...] = ()


@dataclass(frozen=True)
class PatternObject:
    name: str
    cls: str
    constraints: Tuple[Tuple[str, Literal], ...] = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ObjectPattern:
    objects: Tuple[PatternObject, ...] = ()
    links: Tuple[LinkDecl, ...] = ()


@dataclass(frozen=True)
class Oracle:
    pattern: Optional[ObjectPattern] = None
    assertions: Tuple[Expr, ...] = ()


CATEGORIES = ("unit", "integration", "acceptance")
DRIVER_MODES = ("strict", "loose")


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    name: str
    category: str
    setup: Setup = Setup()
    driver: Driver = Driver()
    oracle: Oracle = Oracle()
    loc: Optional[SourceLocation] = _loc()

    @property
    def effective_mode(self) -> str:
        if self.driver.mode is not None:
            return self.driver.mode
        return "loose" if self.category == "acceptance" else "strict"


@dataclass(frozen=True)
class TestSuite:
    __test__ = False

    tests: Tuple[TestCase, ...] = ()

    def test_named(self, name: str) -> Optional[TestCase]:
        for test in self.tests:
            if test.name == name:
                return test
        return None


# --- refactoring scripts ------------------------------------------------------


@dataclass(frozen=True)
class PullUpAttribute:
    subclass: str
    attribute: str
    target: str
    default: Literal
    merge: bool = False
    clones: Tuple[Literal, ...] = ()
    loc: Optional[SourceLocation] = _loc()


VARIANTS = ("override", "abstract", "factor")


@dataclass(frozen=True)
class PullUpMethod:
    subclass: str
    method: str
    target: str
    variant: str = "override"
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class RenameAttribute:
    cls: str
    old: str
    new: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class RenameMethod:
    cls: str
    old: str
    new: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class RenameClass:
    old: str
    new: str
    loc: Optional[SourceLocation] = _loc()


Refactoring = Union[PullUpAttribute, PullUpMethod, RenameAttribute, RenameMethod, RenameClass]

KEYWORDS = frozenset(
    """
    class extends published abstract method attr statechart initial state on
    assoc invariant context return new if else foreach in test unit
    integration acceptance setup driver strict loose expect check oracle
    pattern assert link self true false and or not implies pull_up_attr
    pull_up_method rename_attr rename_method rename_class default merge clone
    variant override factor
    """.split()
)
