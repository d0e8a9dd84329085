"""Object spaces: the runtime heap of objects, attribute values and links."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

from workbench.ast import Model
from workbench.model import RoleInfo, is_subclass
from workbench.printer import quote


@dataclass(frozen=True, order=True)
class ObjectRef:
    """Identity of an object; the index is its creation order, starting at 1."""

    index: int

    def __str__(self) -> str:
        return f"#{self.index}"


Value = Union[int, bool, str, ObjectRef, FrozenSet[ObjectRef]]


@dataclass
class ObjectRecord:
    cls: str
    attributes: Dict[str, Value] = field(default_factory=dict)
    state: Optional[str] = None
    name: Optional[str] = None


Link = Tuple[str, int, int]


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return quote(value)
    if isinstance(value, ObjectRef):
        return str(value)
    return "{" + ", ".join(str(ref) for ref in sorted(value)) + "}"


class ObjectSpace:
    """Objects keyed by creation index plus a set of (association, left, right) links."""

    def __init__(self, model: Model) -> None:
        self.model = model
        self.objects: Dict[int, ObjectRecord] = {}
        self.links: Set[Link] = set()
        self._next = 1

    def create(self, cls: str, attributes: Dict[str, Value], state: Optional[str] = None, name: Optional[str] = None) -> ObjectRef:
        ref = ObjectRef(self._next)
        self._next += 1
        self.objects[ref.index] = ObjectRecord(cls, dict(attributes), state, name)
        return ref

    def get(self, ref: ObjectRef) -> ObjectRecord:
        return self.objects[ref.index]

    def refs(self) -> List[ObjectRef]:
        return [ObjectRef(i) for i in sorted(self.objects)]

    def instances_of(self, cls: str) -> List[ObjectRef]:
        """Instances of `cls` and its subclasses, in creation order."""
        return [ref for ref in self.refs() if is_subclass(self.model, self.get(ref).cls, cls)]

    def partners(self, ref: ObjectRef, info: RoleInfo) -> List[ObjectRef]:
        if info.source_side == "left":
            found = {right for assoc, left, right in self.links if assoc == info.assoc and left == ref.index}
        else:
            found = {left for assoc, left, right in self.links if assoc == info.assoc and right == ref.index}
        return [ObjectRef(i) for i in sorted(found)]

    def link(self, info: RoleInfo, source: ObjectRef, target: ObjectRef) -> None:
        self.links.add(self._link_key(info, source, target))

    def unlink(self, info: RoleInfo, source: ObjectRef, target: ObjectRef) -> None:
        self.links.discard(self._link_key(info, source, target))

    @staticmethod
    def _link_key(info: RoleInfo, source: ObjectRef, target: ObjectRef) -> Link:
        if info.source_side == "left":
            return (info.assoc, source.index, target.index)
        return (info.assoc, target.index, source.index)

    def copy(self) -> "ObjectSpace":
        clone = ObjectSpace(self.model)
        clone.objects = copy.deepcopy(self.objects)
        clone.links = set(self.links)
        clone._next = self._next
        return clone

    def names(self) -> Dict[str, ObjectRef]:
        return {record.name: ObjectRef(i) for i, record in self.objects.items() if record.name is not None}


def serialize_space(space: ObjectSpace) -> str:
    """Canonical text: objects by creation index, attributes by name, links sorted."""
    lines: List[str] = []
    for index in sorted(space.objects):
        record = space.objects[index]
        head = f"object #{index}"
        if record.name is not None:
            head += f" {record.name}"
        head += f" : {record.cls}"
        if record.state is not None:
            head += f" [{record.state}]"
        lines.append(head)
        for attr in sorted(record.attributes):
            lines.append(f"  {attr} = {format_value(record.attributes[attr])}")
    for assoc, left, right in sorted(space.links):
        lines.append(f"link {assoc} #{left} #{right}")
    return "\n".join(lines) + "\n"
