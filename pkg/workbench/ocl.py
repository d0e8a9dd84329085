"""OCL evaluation over an object space.

Two-valued: an expression yields a value or raises `EvalError`; there is no
``undefined``. `and`, `or` and `implies` do not evaluate a right operand the
left one already decides.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping

from workbench.ast import (
    AllInstances,
    BinOp,
    BoolLit,
    CollOp,
    Expr,
    InState,
    IntLit,
    Iterate,
    MethodCall,
    Model,
    Nav,
    Neg,
    Not,
    Return,
    SelfRef,
    StrLit,
    Var,
)
from workbench.errors import EvalError, ModelError
from workbench.model import resolve_method, role_info
from workbench.space import ObjectRef, ObjectSpace, Value

logger = logging.getLogger(__name__)

DEFAULT_QUERY_DEPTH = 1000


def values_equal(left: Value, right: Value) -> bool:
    """Type-exact equality: an Int never equals a Bool."""
    return type(left) is type(right) and left == right


def int_divide(left: int, right: int) -> int:
    if right == 0:
        raise EvalError("division-by-zero", "division by zero")
    quotient = abs(left) // abs(right)
    return quotient if (left < 0) == (right < 0) else -quotient


class Evaluator:
    def __init__(self, space: ObjectSpace, max_depth: int = DEFAULT_QUERY_DEPTH) -> None:
        self.space = space
        self.model: Model = space.model
        self.max_depth = max_depth
        self._depth = 0

    def eval(self, expr: Expr, env: Mapping[str, Value]) -> Value:
        if isinstance(expr, (IntLit, BoolLit, StrLit)):
            return expr.value
        if isinstance(expr, SelfRef):
            return self._lookup("self", env)
        if isinstance(expr, Var):
            return self._lookup(expr.name, env)
        if isinstance(expr, Nav):
            return self._nav(expr, env)
        if isinstance(expr, MethodCall):
            return self._query(expr, env)
        if isinstance(expr, BinOp):
            return self._binop(expr, env)
        if isinstance(expr, Not):
            return not self._bool(expr.operand, env)
        if isinstance(expr, Neg):
            return -self._int(expr.operand, env)
        if isinstance(expr, CollOp):
            return self._collop(expr, env)
        if isinstance(expr, Iterate):
            return self._iterate(expr, env)
        if isinstance(expr, AllInstances):
            return frozenset(self.space.instances_of(expr.cls))
        if isinstance(expr, InState):
            ref = self._object(expr.source, env)
            return self.space.get(ref).state == expr.state
        raise EvalError("type-error", f"cannot evaluate {type(expr).__name__}")

    # -- helpers -------------------------------------------------------------------

    @staticmethod
    def _lookup(name: str, env: Mapping[str, Value]) -> Value:
        if name not in env:
            raise EvalError("unbound-variable", f"'{name}' is not bound")
        return env[name]

    def _bool(self, expr: Expr, env: Mapping[str, Value]) -> bool:
        value = self.eval(expr, env)
        if not isinstance(value, bool):
            raise EvalError("type-error", f"expected a Bool, got {value!r}")
        return value

    def _int(self, expr: Expr, env: Mapping[str, Value]) -> int:
        value = self.eval(expr, env)
        if isinstance(value, bool) or not isinstance(value, int):
            raise EvalError("type-error", f"expected an Int, got {value!r}")
        return value

    def _object(self, expr: Expr, env: Mapping[str, Value]) -> ObjectRef:
        value = self.eval(expr, env)
        if not isinstance(value, ObjectRef):
            raise EvalError("type-error", f"expected an object, got {value!r}")
        return value

    def _nav(self, expr: Nav, env: Mapping[str, Value]) -> Value:
        ref = self._object(expr.source, env)
        record = self.space.get(ref)
        if expr.name in record.attributes:
            return record.attributes[expr.name]
        info = role_info(self.model, record.cls, expr.name)
        if info is None:
            raise EvalError("type-error", f"'{record.cls}' has no feature '{expr.name}'")
        partners = self.space.partners(ref, info)
        if not info.single:
            return frozenset(partners)
        if not partners:
            raise EvalError("undefined-navigation", f"role '{expr.name}' of {ref} ({record.cls}) is not set")
        return partners[0]

    def as_set(self, expr: Expr, env: Mapping[str, Value]) -> FrozenSet[ObjectRef]:
        """Receiver of a collection operation; single objects and roles count as sets."""
        if isinstance(expr, Nav):
            ref = self._object(expr.source, env)
            record = self.space.get(ref)
            if expr.name not in record.attributes:
                info = role_info(self.model, record.cls, expr.name)
                if info is not None:
                    return frozenset(self.space.partners(ref, info))
        value = self.eval(expr, env)
        if isinstance(value, ObjectRef):
            return frozenset((value,))
        if isinstance(value, frozenset):
            return value
        raise EvalError("type-error", f"expected a collection, got {value!r}")

    def _query(self, expr: MethodCall, env: Mapping[str, Value]) -> Value:
        ref = self._object(expr.target, env)
        args = [self.eval(arg, env) for arg in expr.args]
        cls = self.space.get(ref).cls
        try:
            method = resolve_method(self.model, cls, expr.method)
        except ModelError as exc:
            raise EvalError("type-error", exc.message) from exc
        if method.body is None:
            raise EvalError("abstract-call", f"'{cls}.{expr.method}' has no body")
        if not method.is_query:
            raise EvalError("impure-call", f"'{cls}.{expr.method}' is not a query method")
        if self._depth >= self.max_depth:
            raise EvalError("budget-exhausted", f"query nesting exceeds {self.max_depth}")
        inner: Dict[str, Value] = {"self": ref}
        inner.update({p.name: value for p, value in zip(method.params, args)})
        body = method.body[0]
        assert isinstance(body, Return)
        self._depth += 1
        try:
            return self.eval(body.value, inner)
        finally:
            self._depth -= 1

    def _binop(self, expr: BinOp, env: Mapping[str, Value]) -> Value:
        op = expr.op
        if op == "and":
            return self._bool(expr.left, env) and self._bool(expr.right, env)
        if op == "or":
            return self._bool(expr.left, env) or self._bool(expr.right, env)
        if op == "implies":
            return (not self._bool(expr.left, env)) or self._bool(expr.right, env)
        if op in ("==", "!="):
            same = values_equal(self.eval(expr.left, env), self.eval(expr.right, env))
            return same if op == "==" else not same
        left = self._int(expr.left, env)
        right = self._int(expr.right, env)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return int_divide(left, right)
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        raise EvalError("type-error", f"unknown operator {op!r}")

    def _collop(self, expr: CollOp, env: Mapping[str, Value]) -> Value:
        elements = self.as_set(expr.source, env)
        args = [self.eval(arg, env) for arg in expr.args]
        if expr.op == "size":
            return len(elements)
        if expr.op == "isEmpty":
            return not elements
        if expr.op == "notEmpty":
            return bool(elements)
        if expr.op == "includes":
            return any(values_equal(element, args[0]) for element in elements)
        raise EvalError("type-error", f"unknown collection operation '{expr.op}'")

    def _iterate(self, expr: Iterate, env: Mapping[str, Value]) -> Value:
        elements = sorted(self.as_set(expr.source, env))
        scope = dict(env)
        chosen: List[ObjectRef] = []
        for element in elements:
            scope[expr.var] = element
            holds = self._bool(expr.body, scope)
            if expr.op == "forAll" and not holds:
                return False
            if expr.op == "exists" and holds:
                return True
            if expr.op == "select" and holds:
                chosen.append(element)
        if expr.op == "forAll":
            return True
        if expr.op == "exists":
            return False
        if expr.op == "select":
            return frozenset(chosen)
        raise EvalError("type-error", f"unknown iterator '{expr.op}'")


def eval_ocl(expr: Expr, space: ObjectSpace, env: Mapping[str, Value], max_depth: int = DEFAULT_QUERY_DEPTH) -> Value:
    try:
        return Evaluator(space, max_depth).eval(expr, env)
    except RecursionError as exc:
        raise EvalError("budget-exhausted", "expression nesting exceeds the interpreter stack") from exc


@dataclass(frozen=True)
class InvariantVerdict:
    invariant: str
    obj: ObjectRef
    verdict: str  # pass | fail | error
    message: str = ""


def check_invariants(model: Model, space: ObjectSpace, max_depth: int = DEFAULT_QUERY_DEPTH) -> List[InvariantVerdict]:
    verdicts: List[InvariantVerdict] = []
    for inv in model.invariants:
        for ref in space.instances_of(inv.context):
            try:
                holds = eval_ocl(inv.expr, space, {"self": ref}, max_depth)
            except EvalError as exc:
                verdicts.append(InvariantVerdict(inv.name, ref, "error", str(exc)))
                continue
            if holds is True:
                verdicts.append(InvariantVerdict(inv.name, ref, "pass"))
            else:
                verdicts.append(InvariantVerdict(inv.name, ref, "fail", f"invariant '{inv.name}' does not hold for {ref}"))
    logger.debug("checked %d invariant instance(s)", len(verdicts))
    return verdicts
