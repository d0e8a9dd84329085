import math
import random
import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from tests.support import auction
from workbench.ast import (
    AllInstances,
    BinOp,
    BoolLit,
    CollOp,
    InState,
    IntLit,
    Iterate,
    MethodCall,
    Nav,
    Neg,
    Not,
    StrLit,
    Var,
)
from workbench.errors import EvalError
from workbench.ocl import check_invariants, eval_ocl, int_divide, values_equal
from workbench.parser import parse_ocl
from workbench.runtime import instantiate
from workbench.space import ObjectRef, ObjectSpace, serialize_space

ARITHMETIC = ("+", "-", "*", "/")
COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")
CONNECTIVES = ("and", "or", "implies")


class _Undefined(Exception):
    pass


def reference(expr, env):
    """Straightforward evaluator for the arithmetic and boolean core."""
    if isinstance(expr, (IntLit, BoolLit)):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Not):
        return not reference(expr.operand, env)
    if isinstance(expr, Neg):
        return -reference(expr.operand, env)
    left = reference(expr.left, env)
    if expr.op == "and":
        return left and reference(expr.right, env)
    if expr.op == "or":
        return left or reference(expr.right, env)
    if expr.op == "implies":
        return (not left) or reference(expr.right, env)
    right = reference(expr.right, env)
    if expr.op == "/":
        if right == 0:
            raise _Undefined()
        # operands stay small, so float division is exact enough to truncate
        return int(left / right)
    return {
        "+": lambda: left + right,
        "-": lambda: left - right,
        "*": lambda: left * right,
        "<": lambda: left < right,
        "<=": lambda: left <= right,
        ">": lambda: left > right,
        ">=": lambda: left >= right,
        "==": lambda: left == right,
        "!=": lambda: left != right,
    }[expr.op]()


def int_term(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice("xyz")) if rng.random() < 0.5 else IntLit(rng.randint(0, 12))
    if rng.random() < 0.15:
        return Neg(int_term(rng, depth - 1))
    return BinOp(rng.choice(ARITHMETIC), int_term(rng, depth - 1), int_term(rng, depth - 1))


def bool_term(rng, depth):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        if rng.random() < 0.2:
            return BoolLit(rng.random() < 0.5)
        return BinOp(rng.choice(COMPARISONS), int_term(rng, 2), int_term(rng, 2))
    if roll < 0.45:
        return Not(bool_term(rng, depth - 1))
    return BinOp(rng.choice(CONNECTIVES), bool_term(rng, depth - 1), bool_term(rng, depth - 1))


class ReferenceEquivalenceTests(unittest.TestCase):
    def setUp(self):
        model, suite = auction()
        self.space = instantiate(model, suite.test_named("closeEndsAuction").setup)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_core_operators_match_reference(self, seed):
        rng = random.Random(seed)
        expr = bool_term(rng, 3)
        env = {name: rng.randint(-20, 20) for name in "xyz"}
        try:
            expected = reference(expr, env)
        except _Undefined:
            with self.assertRaises(EvalError):
                eval_ocl(expr, self.space, env)
            return
        self.assertIs(eval_ocl(expr, self.space, env), expected)


# --- object spaces ---------------------------------------------------------------------

OBJECT_TYPES = ("Auction", "Bid", "Person")
ATTRIBUTES = {
    "Auction": {"closingTime": "Int", "extensionTime": "Int", "bidCount": "Int"},
    "Bid": {"time": "Int", "amount": "Int"},
    "Person": {"name": "String", "notifications": "Int"},
}
INT_FEATURES = {cls: tuple(n for n, t in attrs.items() if t == "Int") for cls, attrs in ATTRIBUTES.items()}
NAMES = ("ann", "bob", "")


class _Failure(Exception):
    def __init__(self, kind):
        super().__init__(kind)
        self.kind = kind


def random_world(rng):
    """Three to five auction objects as plain records plus (auction, bid) links."""
    classes = list(OBJECT_TYPES) + [rng.choice(OBJECT_TYPES) for _ in range(rng.randint(0, 2))]
    rng.shuffle(classes)
    objects = {}
    for index, cls in enumerate(classes, start=1):
        attrs = {
            name: rng.randint(-3, 12) if kind == "Int" else rng.choice(NAMES)
            for name, kind in ATTRIBUTES[cls].items()
        }
        objects[index] = (cls, attrs, rng.choice(("Open", "Closed")) if cls == "Auction" else None)
    auctions = [i for i, (cls, _, _) in objects.items() if cls == "Auction"]
    links = {
        (rng.choice(auctions), i)
        for i, (cls, _, _) in objects.items()
        if cls == "Bid" and rng.random() < 0.7
    }
    return objects, links


def build_space(model, objects, links):
    space = ObjectSpace(model)
    for index in sorted(objects):
        cls, attrs, state = objects[index]
        space.create(cls, attrs, state, f"o{index}")
    space.links.update(("bids", auction, bid) for auction, bid in links)
    return space


class BruteForce:
    """Evaluates by scanning the plain records; shares no code with the interpreter."""

    def __init__(self, objects, links):
        self.objects = objects
        self.links = links

    def partners(self, ref, role):
        if role == "bids":
            return [ObjectRef(b) for a, b in sorted(self.links) if a == ref.index]
        return [ObjectRef(a) for a, b in sorted(self.links) if b == ref.index]

    def roles(self, cls):
        return {"Auction": ("bids",), "Bid": ("auction",)}.get(cls, ())

    def obj(self, expr, env):
        value = self.eval(expr, env)
        if not isinstance(value, ObjectRef):
            raise _Failure("type-error")
        return value

    def integer(self, expr, env):
        value = self.eval(expr, env)
        if type(value) is not int:
            raise _Failure("type-error")
        return value

    def boolean(self, expr, env):
        value = self.eval(expr, env)
        if type(value) is not bool:
            raise _Failure("type-error")
        return value

    def elements(self, expr, env):
        if isinstance(expr, Nav):
            cls, attrs, _ = self.objects[self.obj(expr.source, env).index]
            if expr.name not in attrs and expr.name in self.roles(cls):
                return frozenset(self.partners(self.obj(expr.source, env), expr.name))
        value = self.eval(expr, env)
        if isinstance(value, ObjectRef):
            return frozenset([value])
        if isinstance(value, frozenset):
            return value
        raise _Failure("type-error")

    def eval(self, expr, env):
        if isinstance(expr, (IntLit, BoolLit, StrLit)):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in env:
                raise _Failure("unbound-variable")
            return env[expr.name]
        if isinstance(expr, Nav):
            ref = self.obj(expr.source, env)
            cls, attrs, _ = self.objects[ref.index]
            if expr.name in attrs:
                return attrs[expr.name]
            if expr.name not in self.roles(cls):
                raise _Failure("type-error")
            found = self.partners(ref, expr.name)
            if expr.name == "bids":
                return frozenset(found)
            if not found:
                raise _Failure("undefined-navigation")
            return found[0]
        if isinstance(expr, MethodCall):
            ref = self.obj(expr.target, env)
            return self.objects[ref.index][1]["closingTime"]
        if isinstance(expr, Not):
            return not self.boolean(expr.operand, env)
        if isinstance(expr, Neg):
            return -self.integer(expr.operand, env)
        if isinstance(expr, AllInstances):
            return frozenset(ObjectRef(i) for i, (cls, _, _) in self.objects.items() if cls == expr.cls)
        if isinstance(expr, InState):
            return self.objects[self.obj(expr.source, env).index][2] == expr.state
        if isinstance(expr, CollOp):
            members = self.elements(expr.source, env)
            args = [self.eval(arg, env) for arg in expr.args]
            if expr.op == "size":
                return len(members)
            if expr.op == "isEmpty":
                return len(members) == 0
            if expr.op == "notEmpty":
                return len(members) > 0
            return args[0] in members
        if isinstance(expr, Iterate):
            chosen = []
            for ref in sorted(self.elements(expr.source, env), key=lambda r: r.index):
                holds = self.boolean(expr.body, {**env, expr.var: ref})
                if expr.op == "forAll" and not holds:
                    return False
                if expr.op == "exists" and holds:
                    return True
                if holds:
                    chosen.append(ref)
            return {"forAll": True, "exists": False}.get(expr.op, frozenset(chosen))
        return self.binop(expr, env)

    def binop(self, expr, env):
        if expr.op == "and":
            return self.boolean(expr.left, env) and self.boolean(expr.right, env)
        if expr.op == "or":
            return self.boolean(expr.left, env) or self.boolean(expr.right, env)
        if expr.op == "implies":
            return not self.boolean(expr.left, env) or self.boolean(expr.right, env)
        if expr.op in ("==", "!="):
            left, right = self.eval(expr.left, env), self.eval(expr.right, env)
            same = type(left) is type(right) and left == right
            return same if expr.op == "==" else not same
        left = self.integer(expr.left, env)
        right = self.integer(expr.right, env)
        if expr.op == "/":
            if right == 0:
                raise _Failure("division-by-zero")
            return math.trunc(Fraction(left, right))
        return {
            "+": left + right,
            "-": left - right,
            "*": left * right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[expr.op]


class Expressions:
    """Well-typed random expressions over the auction model; `scope` maps variables to types."""

    def __init__(self, rng):
        self.rng = rng

    def of(self, type_name, depth, scope):
        if type_name == "Int":
            return self.integer(depth, scope)
        if type_name == "Bool":
            return self.boolean(depth, scope)
        if type_name == "String":
            return self.string(depth, scope)
        if type_name.startswith("Set("):
            return self.objects(type_name[4:-1], depth, scope)
        return self.obj(type_name, depth, scope)

    def var(self, type_name, scope):
        return Var(self.rng.choice(sorted(n for n, t in scope.items() if t == type_name)))

    def obj(self, cls, depth, scope):
        if cls == "Auction" and depth > 0 and self.rng.random() < 0.3:
            return Nav(self.obj("Bid", depth - 1, scope), "auction")
        return self.var(cls, scope)

    def objects(self, cls, depth, scope):
        rng = self.rng
        if depth == 0 or rng.random() < 0.3:
            return AllInstances(cls)
        if cls == "Bid" and rng.random() < 0.5:
            return Nav(self.obj("Auction", depth - 1, scope), "bids")
        var = f"v{depth}"
        body = self.boolean(depth - 1, {**scope, var: cls})
        return Iterate(self.objects(cls, depth - 1, scope), "select", var, body)

    def collection(self, depth, scope):
        cls = self.rng.choice(OBJECT_TYPES)
        if self.rng.random() < 0.2:
            return self.obj(cls, depth, scope)
        return self.objects(cls, depth, scope)

    def string(self, depth, scope):
        if depth == 0 or self.rng.random() < 0.4:
            return StrLit(self.rng.choice(NAMES))
        return Nav(self.obj("Person", depth - 1, scope), "name")

    def integer(self, depth, scope):
        rng = self.rng
        if depth == 0 or rng.random() < 0.2:
            roll = rng.random()
            if roll < 0.4:
                return IntLit(rng.randint(0, 9))
            if roll < 0.6:
                return self.var("Int", scope)
            cls = rng.choice(OBJECT_TYPES)
            return Nav(self.var(cls, scope), rng.choice(INT_FEATURES[cls]))
        d = depth - 1
        roll = rng.random()
        if roll < 0.35:
            return BinOp(rng.choice(ARITHMETIC), self.integer(d, scope), self.integer(d, scope))
        if roll < 0.45:
            return Neg(self.integer(d, scope))
        if roll < 0.65:
            cls = rng.choice(OBJECT_TYPES)
            return Nav(self.obj(cls, d, scope), rng.choice(INT_FEATURES[cls]))
        if roll < 0.85:
            return CollOp(self.collection(d, scope), "size")
        return MethodCall(self.obj("Auction", d, scope), "getClosingTime")

    def boolean(self, depth, scope):
        rng = self.rng
        if depth == 0 or rng.random() < 0.15:
            if rng.random() < 0.3:
                return BoolLit(rng.random() < 0.5)
            return BinOp(rng.choice(COMPARISONS), self.integer(0, scope), self.integer(0, scope))
        d = depth - 1
        roll = rng.random()
        if roll < 0.15:
            return BinOp(rng.choice(COMPARISONS), self.integer(d, scope), self.integer(d, scope))
        if roll < 0.25:
            type_name = rng.choice(("String",) + OBJECT_TYPES)
            return BinOp(rng.choice(("==", "!=")), self.of(type_name, d, scope), self.of(type_name, d, scope))
        if roll < 0.35:
            return Not(self.boolean(d, scope))
        if roll < 0.5:
            return BinOp(rng.choice(CONNECTIVES), self.boolean(d, scope), self.boolean(d, scope))
        if roll < 0.6:
            return CollOp(self.collection(d, scope), rng.choice(("isEmpty", "notEmpty")))
        if roll < 0.7:
            cls = rng.choice(OBJECT_TYPES)
            return CollOp(self.objects(cls, d, scope), "includes", (self.obj(cls, d, scope),))
        if roll < 0.88:
            cls = rng.choice(OBJECT_TYPES)
            var = f"v{depth}"
            body = self.boolean(d, {**scope, var: cls})
            return Iterate(self.objects(cls, d, scope), rng.choice(("forAll", "exists")), var, body)
        return InState(self.obj("Auction", d, scope), rng.choice(("Open", "Closed")))


class SpaceReferenceTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.model, _ = auction()

    @settings(max_examples=500, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_interpreter_matches_brute_force(self, seed):
        rng = random.Random(seed)
        objects, links = random_world(rng)
        space = build_space(self.model, objects, links)
        env = {f"o{i}": ObjectRef(i) for i in objects}
        env["x"] = rng.randint(-5, 5)
        scope = {f"o{i}": cls for i, (cls, _, _) in objects.items()}
        scope["x"] = "Int"
        kind = rng.choice(("Bool", "Bool", "Int", "String", "Auction", "Set(Bid)", "Set(Person)"))
        expr = Expressions(rng).of(kind, 4, scope)
        before = serialize_space(space)
        try:
            expected = BruteForce(objects, links).eval(expr, env)
        except _Failure as failure:
            with self.assertRaises(EvalError) as caught:
                eval_ocl(expr, space, env)
            self.assertEqual(caught.exception.kind, failure.kind, expr)
        else:
            actual = eval_ocl(expr, space, env)
            self.assertIs(type(actual), type(expected), expr)
            self.assertEqual(actual, expected, expr)
        self.assertEqual(serialize_space(space), before)


class ArithmeticTests(unittest.TestCase):
    def test_division_truncates_toward_zero(self):
        self.assertEqual(int_divide(7, 2), 3)
        self.assertEqual(int_divide(-7, 2), -3)
        self.assertEqual(int_divide(7, -2), -3)
        self.assertEqual(int_divide(-7, -2), 3)

    def test_division_by_zero_is_an_error(self):
        with self.assertRaises(EvalError) as caught:
            int_divide(1, 0)
        self.assertEqual(caught.exception.kind, "division-by-zero")

    def test_equality_is_type_exact(self):
        self.assertFalse(values_equal(1, True))
        self.assertFalse(values_equal(0, False))
        self.assertTrue(values_equal("a", "a"))

    def test_connectives_short_circuit(self):
        model, suite = auction()
        space = instantiate(model, suite.test_named("closeEndsAuction").setup)
        self.assertIs(eval_ocl(parse_ocl("false and 1 / 0 == 1"), space, {}), False)
        self.assertIs(eval_ocl(parse_ocl("true or 1 / 0 == 1"), space, {}), True)
        self.assertIs(eval_ocl(parse_ocl("false implies 1 / 0 == 1"), space, {}), True)

    def test_type_errors_are_errors_not_false(self):
        model, suite = auction()
        space = instantiate(model, suite.test_named("closeEndsAuction").setup)
        with self.assertRaises(EvalError) as caught:
            eval_ocl(parse_ocl("1 and true"), space, {})
        self.assertEqual(caught.exception.kind, "type-error")
        with self.assertRaises(EvalError) as caught:
            eval_ocl(parse_ocl("missing + 1"), space, {})
        self.assertEqual(caught.exception.kind, "unbound-variable")


class ObjectSpaceEvaluationTests(unittest.TestCase):
    def setUp(self):
        self.model, suite = auction()
        self.space = instantiate(self.model, suite.test_named("recomputeIndexCountsBids").setup)
        self.env = dict(self.space.names())

    def evaluate(self, text):
        return eval_ocl(parse_ocl(text), self.space, self.env)

    def test_attribute_navigation(self):
        self.assertEqual(self.evaluate("a.closingTime + a.extensionTime"), 110)
        self.assertEqual(self.evaluate("a.bidCount"), 0)

    def test_role_navigation_and_collections(self):
        self.assertEqual(self.evaluate("a.bids->size()"), 2)
        self.assertIs(self.evaluate("a.bids->includes(b1)"), True)
        self.assertIs(self.evaluate("b1.auction == a"), True)
        self.assertIs(self.evaluate("a.bids->notEmpty()"), True)

    def test_iterators(self):
        self.assertIs(self.evaluate("a.bids->forAll(x | x.time >= 10)"), True)
        self.assertIs(self.evaluate("a.bids->exists(x | x.time > 15)"), True)
        self.assertEqual(self.evaluate("a.bids->select(x | x.time > 15)->size()"), 1)
        self.assertIs(self.evaluate("Bid.allInstances()->forAll(x | x.auction == a)"), True)

    def test_single_object_counts_as_a_collection(self):
        self.assertEqual(self.evaluate("b1.auction->size()"), 1)

    def test_unset_single_role_is_undefined(self):
        model, suite = auction()
        space = instantiate(model, suite.test_named("closingTimeNeverShrinks").setup)
        with self.assertRaises(EvalError) as caught:
            eval_ocl(parse_ocl("b.auction.closingTime"), space, space.names())
        self.assertEqual(caught.exception.kind, "undefined-navigation")

    def test_queries_run_their_return_expression(self):
        self.assertEqual(self.evaluate("a.getClosingTime()"), 100)

    def test_state_membership(self):
        self.assertIs(self.evaluate("a.oclInState(Open)"), True)
        self.assertIs(self.evaluate("a.oclInState(Closed)"), False)

    def test_non_query_methods_cannot_be_called(self):
        with self.assertRaises(EvalError) as caught:
            self.evaluate("a.close()")
        self.assertEqual(caught.exception.kind, "impure-call")


class InvariantTests(unittest.TestCase):
    def test_every_instance_gets_a_verdict(self):
        model, suite = auction()
        space = instantiate(model, suite.test_named("recomputeIndexCountsBids").setup)
        verdicts = check_invariants(model, space)
        self.assertEqual([v.verdict for v in verdicts], ["pass"])

    def test_violation_names_the_object(self):
        model, suite = auction()
        space = instantiate(model, suite.test_named("closeEndsAuction").setup)
        (ref,) = space.instances_of("Auction")
        space.get(ref).attributes["extensionTime"] = -1
        (verdict,) = check_invariants(model, space)
        self.assertEqual(verdict.verdict, "fail")
        self.assertEqual(verdict.obj, ref)
        self.assertIn("extensionNotNegative", verdict.message)


if __name__ == "__main__":
    unittest.main()
