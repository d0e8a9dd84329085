"""Seeded random generators for models, tests, scripts and statecharts.

Every generator takes a `random.Random`, so a failing case is reproduced by
its seed. Generated models are well-formed by construction.
"""
from __future__ import annotations

import random
from typing import Dict, List, Tuple

from workbench.ast import (
    AssocDef,
    AssocEnd,
    Assign,
    AttributeDef,
    BinOp,
    BoolLit,
    ClassDef,
    Driver,
    InvariantDef,
    IntLit,
    LinkDecl,
    MethodCall,
    MethodDef,
    Model,
    Nav,
    Not,
    ObjectDecl,
    ObjectPattern,
    Oracle,
    Param,
    PatternObject,
    PullUpAttribute,
    PullUpMethod,
    RenameAttribute,
    RenameClass,
    RenameMethod,
    Return,
    SelfRef,
    Setup,
    Statechart,
    StrLit,
    TestCase,
    TestSuite,
    Transition,
    TriggerCall,
    Var,
)

TYPES = ("Int", "Bool", "String")
MULTS = ("1", "0..1", "*")
WORDS = ("ann", "bob", "", "x y", 'q"uote', "tab\there")


def literal(rng: random.Random, type_name: str):
    if type_name == "Int":
        return IntLit(rng.randint(0, 50))
    if type_name == "Bool":
        return BoolLit(rng.random() < 0.5)
    return StrLit(rng.choice(WORDS))


def int_expr(rng: random.Random, ints: List, depth: int = 2):
    """Int-typed expression over the given Int-valued leaves (no negative literals)."""
    if depth == 0 or rng.random() < 0.4:
        if ints and rng.random() < 0.6:
            return rng.choice(ints)
        return IntLit(rng.randint(0, 20))
    op = rng.choice(["+", "-", "*"])
    return BinOp(op, int_expr(rng, ints, depth - 1), int_expr(rng, ints, depth - 1))


def bool_expr(rng: random.Random, ints: List, bools: List, depth: int = 2):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        if bools and rng.random() < 0.5:
            return rng.choice(bools)
        return BinOp(rng.choice(["<", "<=", ">", ">=", "==", "!="]), int_expr(rng, ints, 1), int_expr(rng, ints, 1))
    if roll < 0.45:
        return Not(bool_expr(rng, ints, bools, depth - 1))
    op = rng.choice(["and", "or", "implies"])
    return BinOp(op, bool_expr(rng, ints, bools, depth - 1), bool_expr(rng, ints, bools, depth - 1))


def _method(rng: random.Random, cls_index: int, number: int, attrs: List[AttributeDef]) -> MethodDef:
    name = f"m{cls_index}x{number}"
    params = tuple(Param(f"p{k}", rng.choice(TYPES)) for k in range(rng.randint(0, 2)))
    ints = [Nav(SelfRef(), a.name) for a in attrs if a.type == "Int"]
    ints += [Var(p.name) for p in params if p.type == "Int"]
    published = rng.random() < 0.5
    writable = [a for a in attrs if a.type == "Int"]
    if rng.random() < 0.5 or not writable:
        return MethodDef(name, params, "Int", (Return(int_expr(rng, ints)),), published)
    target = rng.choice(writable)
    return MethodDef(name, params, None, (Assign(SelfRef(), target.name, int_expr(rng, ints)),), published)


def random_model(rng: random.Random, max_classes: int = 4) -> Model:
    count = rng.randint(1, max_classes)
    classes: List[ClassDef] = []
    inherited: Dict[str, List[AttributeDef]] = {}
    for i in range(count):
        superclass = f"C{rng.randrange(i)}" if i and rng.random() < 0.5 else None
        own = tuple(AttributeDef(f"a{i}x{j}", rng.choice(TYPES)) for j in range(rng.randint(0, 3)))
        visible = list(inherited.get(superclass, [])) + list(own) if superclass else list(own)
        inherited[f"C{i}"] = visible
        methods = tuple(_method(rng, i, j, visible) for j in range(rng.randint(0, 2)))
        chart = None
        triggers = [m.name for m in methods if m.return_type is None]
        if triggers and rng.random() < 0.5:
            states = tuple(f"S{k}" for k in range(rng.randint(1, 3)))
            transitions = tuple(
                Transition(rng.choice(states), rng.choice(states), rng.choice(triggers))
                for _ in range(rng.randint(0, 3))
            )
            chart = Statechart(states[0], states, transitions)
        classes.append(ClassDef(f"C{i}", superclass, rng.random() < 0.5, own, methods, chart))

    associations: List[AssocDef] = []
    if count > 1 and rng.random() < 0.6:
        left, right = rng.sample(range(count), 2)
        associations.append(
            AssocDef("r0", AssocEnd(f"C{left}", "r0a", rng.choice(MULTS)), AssocEnd(f"C{right}", "r0b", rng.choice(MULTS)))
        )

    invariants: List[InvariantDef] = []
    for cls in classes:
        ints = [Nav(SelfRef(), a.name) for a in inherited[cls.name] if a.type == "Int"]
        if ints and rng.random() < 0.3:
            invariants.append(InvariantDef(f"inv{len(invariants)}", cls.name, BinOp(">=", rng.choice(ints), IntLit(0))))
    return Model(tuple(classes), tuple(associations), tuple(invariants))


def _concrete_values(rng: random.Random, attrs: List[AttributeDef]) -> Tuple:
    chosen = [a for a in attrs if rng.random() < 0.5]
    values = []
    for a in chosen:
        if a.type == "Int" and rng.random() < 0.2:
            values.append((a.name, IntLit(-rng.randint(1, 9))))
        else:
            values.append((a.name, literal(rng, a.type)))
    return tuple(values)


def random_suite(rng: random.Random, model: Model, count: int = 3) -> TestSuite:
    """Syntactically valid tests over `model`; only round-trip properties hold for them."""
    from workbench.model import effective_attributes

    tests: List[TestCase] = []
    for t in range(count):
        objects = []
        for k in range(rng.randint(0, 3)):
            cls = rng.choice(model.classes)
            objects.append(ObjectDecl(f"o{k}", cls.name, _concrete_values(rng, effective_attributes(model, cls.name))))
        links = []
        if len(objects) >= 2 and model.associations:
            links.append(LinkDecl(objects[0].name, model.associations[0].right.role, objects[1].name))
        items = []
        if objects:
            items.append(TriggerCall(MethodCall(Var(objects[0].name), "m", (IntLit(rng.randint(0, 9)),))))
        pattern = None
        if objects and rng.random() < 0.6:
            first = objects[0]
            attrs = effective_attributes(model, first.cls)
            pattern = ObjectPattern((PatternObject(first.name, first.cls, _concrete_values(rng, attrs)),), tuple(links[:1]))
        assertions = tuple(bool_expr(rng, [IntLit(1)], [], 1) for _ in range(rng.randint(0, 2)))
        mode = rng.choice([None, "strict", "loose"])
        tests.append(
            TestCase(
                f"t{t}",
                rng.choice(["unit", "integration", "acceptance"]),
                Setup(tuple(objects), tuple(links)),
                Driver(mode, tuple(items)),
                Oracle(pattern, assertions),
            )
        )
    return TestSuite(tuple(tests))


def random_script(rng: random.Random, length: int = 3) -> list:
    steps = []
    for _ in range(length):
        kind = rng.randrange(5)
        if kind == 0:
            default = literal(rng, rng.choice(TYPES))
            clones = tuple(literal(rng, "Int") for _ in range(rng.randint(0, 2)))
            steps.append(PullUpAttribute("C1", "a1x0", "C0", default, rng.random() < 0.5, clones))
        elif kind == 1:
            steps.append(PullUpMethod("C1", "m1x0", "C0", rng.choice(["override", "abstract", "factor"])))
        elif kind == 2:
            steps.append(RenameAttribute("C0", "a0x0", "renamed"))
        elif kind == 3:
            steps.append(RenameMethod("C0", "m0x0", "renamed"))
        else:
            steps.append(RenameClass("C0", "D0"))
    return steps


# --- statecharts ---------------------------------------------------------------------


def random_chart_model(rng: random.Random, max_states: int = 8, max_transitions: int = 16) -> Model:
    """One class `Machine` with a flat statechart, triggers e0..eN, optional Int guards."""
    states = tuple(f"S{k}" for k in range(rng.randint(1, max_states)))
    events = [f"e{k}" for k in range(rng.randint(1, 4))]
    transitions = []
    used = set()
    for _ in range(rng.randint(0, max_transitions)):
        source, trigger = rng.choice(states), rng.choice(events)
        # one transition per (source, trigger) keeps the chart deterministic
        if (source, trigger) in used:
            continue
        used.add((source, trigger))
        transitions.append(Transition(source, rng.choice(states), trigger))
    methods = tuple(MethodDef(e, (), None, (), True) for e in events)
    machine = ClassDef("Machine", None, True, (AttributeDef("count", "Int"),), methods, Statechart(states[0], states, tuple(transitions)))
    return Model((machine,))


# --- pull-up triples -------------------------------------------------------------------


def pull_up_triple(rng: random.Random) -> Tuple[Model, PullUpAttribute, TestSuite]:
    """A hierarchy Base <- Left, Right, an applicable pull-up of a Left attribute and an
    acceptance test over the published `Counter` class that never touches it."""
    moved_type = rng.choice(TYPES)
    default = literal(rng, moved_type)
    extra = tuple(AttributeDef(f"x{k}", rng.choice(TYPES)) for k in range(rng.randint(0, 2)))
    base = ClassDef("Base", None, False, extra)
    left = ClassDef("Left", "Base", False, (AttributeDef("moved", moved_type), AttributeDef("own", "Int")))
    right = ClassDef("Right", "Base", False, (AttributeDef("level", "Int"),))
    step_by = rng.randint(1, 5)
    counter = ClassDef(
        "Counter",
        None,
        True,
        (AttributeDef("value", "Int"),),
        (
            MethodDef("bump", (Param("n", "Int"),), None,
                      (Assign(SelfRef(), "value", BinOp("+", Nav(SelfRef(), "value"), BinOp("*", Var("n"), IntLit(step_by)))),), True),
            MethodDef("getValue", (), "Int", (Return(Nav(SelfRef(), "value")),), True),
        ),
    )
    model = Model((base, left, right, counter))
    start, n = rng.randint(0, 20), rng.randint(0, 5)
    objects = [ObjectDecl("c", "Counter", (("value", IntLit(start)),))]
    if rng.random() < 0.5:
        objects.append(ObjectDecl("r", "Right", (("level", IntLit(rng.randint(0, 3))),)))
    test = TestCase(
        "counterBumps",
        "acceptance",
        Setup(tuple(objects)),
        Driver(None, (TriggerCall(MethodCall(Var("c"), "bump", (IntLit(n),))),)),
        Oracle(None, (BinOp(">=", MethodCall(Var("c"), "getValue"), IntLit(start + n * step_by)),)),
    )
    return model, PullUpAttribute("Left", "moved", "Base", default), TestSuite((test,))


def override_hierarchy(rng: random.Random) -> Model:
    """Root <- Mid <- Left, Right, each declaring the queries `m` and `n` at random.

    Every declaration returns a different constant, so dispatch tables tell bodies apart.
    """
    parents = {"Root": None, "Mid": "Root", "Left": "Mid", "Right": "Mid"}
    classes = []
    for index, (name, parent) in enumerate(parents.items()):
        methods = tuple(
            MethodDef(method, (), "Int", (Return(IntLit(10 * index + k)),), True)
            for k, method in enumerate(("m", "n"))
            if rng.random() < 0.6
        )
        classes.append(ClassDef(name, parent, True, (), methods))
    return Model(tuple(classes))
