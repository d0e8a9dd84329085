"""Model well-formedness, inheritance lookup and dynamic dispatch."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from workbench.ast import (
    PRIMITIVE_TYPES,
    TESTER,
    AttributeDef,
    ClassDef,
    MethodDef,
    Model,
    SourceLocation,
    Statechart,
)
from workbench.errors import ModelError

logger = logging.getLogger(__name__)

SINGLE_MULTIPLICITIES = ("1", "0..1")


@dataclass(frozen=True)
class Finding:
    severity: str
    location: Optional[SourceLocation]
    rule: str
    message: str
    feature: Optional[str] = None  # the unresolved member, for unknown-feature findings

    def __str__(self) -> str:
        where = f"{self.location}: " if self.location else ""
        return f"{where}{self.rule}: {self.message}"


@dataclass(frozen=True)
class WellFormednessReport:
    findings: Tuple[Finding, ...] = ()

    @property
    def clean(self) -> bool:
        return not self.findings


@dataclass(frozen=True)
class RoleInfo:
    """A role as seen from a class that can navigate it."""

    assoc: str
    role: str
    target: str
    mult: str
    source_side: str  # "left" or "right": where the navigating object sits in the link

    @property
    def single(self) -> bool:
        return self.mult in SINGLE_MULTIPLICITIES


# --- inheritance -----------------------------------------------------------------


def _require_class(model: Model, name: str) -> ClassDef:
    cls = model.class_named(name)
    if cls is None:
        raise ModelError("unknown-class", f"class '{name}' is not declared")
    return cls


def ancestry(model: Model, name: str) -> List[ClassDef]:
    """The class and its ancestors, nearest first. Stops at unknown names and cycles."""
    chain: List[ClassDef] = []
    seen = set()
    current = model.class_named(name)
    while current is not None and current.name not in seen:
        seen.add(current.name)
        chain.append(current)
        current = model.class_named(current.superclass) if current.superclass else None
    return chain


def is_subclass(model: Model, name: str, ancestor: str) -> bool:
    return any(cls.name == ancestor for cls in ancestry(model, name))


def subclasses(model: Model, name: str) -> List[ClassDef]:
    return [cls for cls in model.classes if cls.superclass == name and cls.name != name]


def descendants(model: Model, name: str) -> List[ClassDef]:
    """Proper descendants in declaration order."""
    return [cls for cls in model.classes if cls.name != name and is_subclass(model, cls.name, name)]


def effective_attributes(model: Model, name: str) -> List[AttributeDef]:
    """Superclass attributes first, then own; no duplicates."""
    _require_class(model, name)
    result: List[AttributeDef] = []
    seen = set()
    for cls in reversed(ancestry(model, name)):
        for attr in cls.attributes:
            if attr.name not in seen:
                seen.add(attr.name)
                result.append(attr)
    return result


def attribute_type(model: Model, cls_name: str, attr: str) -> Optional[str]:
    for cls in ancestry(model, cls_name):
        found = cls.own_attribute(attr)
        if found is not None:
            return found.type
    return None


def find_method(model: Model, cls_name: str, method: str) -> Optional[Tuple[ClassDef, MethodDef]]:
    for cls in ancestry(model, cls_name):
        found = cls.own_method(method)
        if found is not None:
            return cls, found
    return None


def resolve_method(model: Model, cls_name: str, method: str) -> MethodDef:
    """The definition in the nearest class on the chain that declares `method`."""
    return resolve_method_owner(model, cls_name, method)[1]


def resolve_method_owner(model: Model, cls_name: str, method: str) -> Tuple[ClassDef, MethodDef]:
    _require_class(model, cls_name)
    found = find_method(model, cls_name, method)
    if found is None:
        raise ModelError("no-such-method", f"no method '{method}' on '{cls_name}' or its superclasses")
    return found


def effective_methods(model: Model, cls_name: str) -> Dict[str, Tuple[ClassDef, MethodDef]]:
    result: Dict[str, Tuple[ClassDef, MethodDef]] = {}
    for cls in ancestry(model, cls_name):
        for method in cls.methods:
            result.setdefault(method.name, (cls, method))
    return result


def is_abstract_class(model: Model, cls_name: str) -> bool:
    return any(method.abstract for _, method in effective_methods(model, cls_name).values())


def effective_statechart(model: Model, cls_name: str) -> Optional[Tuple[ClassDef, Statechart]]:
    for cls in ancestry(model, cls_name):
        if cls.statechart is not None:
            return cls, cls.statechart
    return None


def is_type(model: Model, type_name: str) -> bool:
    return type_name in PRIMITIVE_TYPES or model.class_named(type_name) is not None


# --- associations ----------------------------------------------------------------


def navigable_roles(model: Model, cls_name: str) -> List[RoleInfo]:
    roles: List[RoleInfo] = []
    for assoc in model.associations:
        if is_subclass(model, cls_name, assoc.left.cls):
            roles.append(RoleInfo(assoc.name, assoc.right.role, assoc.right.cls, assoc.right.mult, "left"))
        if is_subclass(model, cls_name, assoc.right.cls):
            roles.append(RoleInfo(assoc.name, assoc.left.role, assoc.left.cls, assoc.left.mult, "right"))
    return roles


def role_info(model: Model, cls_name: str, role: str) -> Optional[RoleInfo]:
    for info in navigable_roles(model, cls_name):
        if info.role == role:
            return info
    return None


# --- validation --------------------------------------------------------------------


class _Collector:
    def __init__(self) -> None:
        self.findings: List[Finding] = []

    def add(self, rule: str, message: str, location: Optional[SourceLocation]) -> None:
        self.findings.append(Finding("error", location, rule, message))


def _check_classes(model: Model, out: _Collector) -> None:
    seen: Dict[str, ClassDef] = {}
    for cls in model.classes:
        if cls.name in seen:
            out.add("duplicate-class", f"class '{cls.name}' is declared more than once", cls.loc)
        seen.setdefault(cls.name, cls)
        if cls.name in PRIMITIVE_TYPES or cls.name == TESTER:
            out.add("reserved-class-name", f"'{cls.name}' cannot name a class", cls.loc)
        if cls.superclass and model.class_named(cls.superclass) is None:
            out.add("unknown-superclass", f"'{cls.name}' extends undeclared class '{cls.superclass}'", cls.loc)

    reported = set()
    for cls in model.classes:
        chain = [cls.name]
        current = cls
        while current.superclass:
            parent = model.class_named(current.superclass)
            if parent is None:
                break
            if parent.name in chain:
                cycle = chain[chain.index(parent.name):]
                if cls.name in cycle and cls.name not in reported:
                    reported.add(cls.name)
                    out.add(
                        "cycle-in-inheritance",
                        f"'{cls.name}' inherits from itself via {' -> '.join(cycle + [parent.name])}",
                        cls.loc,
                    )
                break
            chain.append(parent.name)
            current = parent


def _check_members(model: Model, cls: ClassDef, out: _Collector) -> None:
    ancestors = ancestry(model, cls.name)[1:]
    names = set()
    for attr in cls.attributes:
        if attr.name in names:
            out.add("duplicate-attribute", f"attribute '{cls.name}.{attr.name}' is declared twice", attr.loc)
        names.add(attr.name)
        if not is_type(model, attr.type):
            out.add("unknown-type", f"attribute '{cls.name}.{attr.name}' has unknown type '{attr.type}'", attr.loc)
        for ancestor in ancestors:
            if ancestor.own_attribute(attr.name) is not None:
                out.add(
                    "shadowed-attribute",
                    f"attribute '{cls.name}.{attr.name}' shadows the one inherited from '{ancestor.name}'",
                    attr.loc,
                )
                break

    method_names = set()
    for method in cls.methods:
        if method.name in method_names:
            out.add("duplicate-method", f"method '{cls.name}.{method.name}' is declared twice", method.loc)
        method_names.add(method.name)
        if method.abstract and method.body is not None:
            out.add("abstract-with-body", f"abstract method '{cls.name}.{method.name}' has a body", method.loc)
        if not method.abstract and method.body is None:
            out.add("missing-body", f"method '{cls.name}.{method.name}' has no body and is not abstract", method.loc)
        params = set()
        for param in method.params:
            if param.name in params:
                out.add("duplicate-parameter", f"parameter '{param.name}' of '{cls.name}.{method.name}' repeats", param.loc)
            params.add(param.name)
            if not is_type(model, param.type):
                out.add("unknown-type", f"parameter '{param.name}' has unknown type '{param.type}'", param.loc)
        if method.return_type is not None and not is_type(model, method.return_type):
            out.add("unknown-type", f"method '{cls.name}.{method.name}' returns unknown type '{method.return_type}'", method.loc)
        for ancestor in ancestors:
            overridden = ancestor.own_method(method.name)
            if overridden is None:
                continue
            if overridden.signature != method.signature:
                out.add(
                    "override-signature-mismatch",
                    f"'{cls.name}.{method.name}' does not match the signature declared in '{ancestor.name}'",
                    method.loc,
                )
            break


def _check_statechart(model: Model, cls: ClassDef, out: _Collector) -> None:
    chart = cls.statechart
    if chart is None:
        return
    states = set()
    for state in chart.states:
        if state in states:
            out.add("duplicate-state", f"state '{state}' is declared twice in '{cls.name}'", chart.loc)
        states.add(state)
    if chart.initial not in states:
        out.add("unknown-state", f"initial state '{chart.initial}' of '{cls.name}' is not declared", chart.loc)
    for transition in chart.transitions:
        for endpoint in (transition.source, transition.target):
            if endpoint not in states:
                out.add("unknown-state", f"transition endpoint '{endpoint}' of '{cls.name}' is not declared", transition.loc)
        if find_method(model, cls.name, transition.trigger) is None:
            out.add("unknown-trigger", f"trigger '{transition.trigger}' is not a method of '{cls.name}'", transition.loc)


def _check_associations(model: Model, out: _Collector) -> None:
    seen = set()
    for assoc in model.associations:
        if assoc.name in seen:
            out.add("duplicate-association", f"association '{assoc.name}' is declared more than once", assoc.loc)
        seen.add(assoc.name)
        for end in (assoc.left, assoc.right):
            if model.class_named(end.cls) is None:
                out.add("unknown-class", f"association '{assoc.name}' refers to undeclared class '{end.cls}'", end.loc or assoc.loc)
        if assoc.left.role == assoc.right.role:
            out.add("duplicate-role", f"association '{assoc.name}' uses role '{assoc.left.role}' twice", assoc.loc)
        # a role is attached to the class at the opposite end
        for role_end, attached in ((assoc.left, assoc.right.cls), (assoc.right, assoc.left.cls)):
            if model.class_named(attached) is None:
                continue
            owners = [attached] + [d.name for d in descendants(model, attached)]
            for owner in owners:
                if attribute_type(model, owner, role_end.role) is not None:
                    out.add(
                        "role-attribute-collision",
                        f"role '{role_end.role}' of '{assoc.name}' collides with an attribute of '{owner}'",
                        role_end.loc or assoc.loc,
                    )
                    break

    for cls in model.classes:
        names: Dict[str, str] = {}
        for info in navigable_roles(model, cls.name):
            if info.role in names and names[info.role] != info.assoc:
                out.add(
                    "duplicate-role",
                    f"'{cls.name}' can navigate two roles named '{info.role}' ({names[info.role]}, {info.assoc})",
                    cls.loc,
                )
            names.setdefault(info.role, info.assoc)


def _check_invariant_names(model: Model, out: _Collector) -> None:
    seen = set()
    for inv in model.invariants:
        if inv.name in seen:
            out.add("duplicate-invariant", f"invariant '{inv.name}' is declared more than once", inv.loc)
        seen.add(inv.name)
        if model.class_named(inv.context) is None:
            out.add("unknown-class", f"invariant '{inv.name}' has undeclared context '{inv.context}'", inv.loc)


def validate_model(model: Model) -> WellFormednessReport:
    """Check every well-formedness rule; findings, never exceptions."""
    from workbench.typecheck import check_model_bodies

    out = _Collector()
    _check_classes(model, out)
    for cls in model.classes:
        _check_members(model, cls, out)
        _check_statechart(model, cls, out)
    _check_associations(model, out)
    _check_invariant_names(model, out)
    out.findings.extend(check_model_bodies(model))
    logger.debug("validated model: %d finding(s)", len(out.findings))
    return WellFormednessReport(tuple(out.findings))
