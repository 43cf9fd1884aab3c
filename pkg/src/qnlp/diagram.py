"""
Planar monoidal string diagrams over pregroup types.

A diagram is a list of layers, each holding exactly one box with identity
wires padded on its left and right.  Diagrams are immutable; composition
returns new values.

>>> n, s = Ty('n'), Ty('s')
>>> alice = Word('Alice', n)
>>> hates = Word('hates', n.r @ s @ n.l)
>>> bob = Word('Bob', n)
>>> sentence = (alice @ hates @ bob
...             >> Cup(n, 'right') @ Id(s @ n.l @ n)
...             >> Id(s) @ Cup(n, 'left'))
>>> sentence.dom, sentence.cod
(Ty(), Ty('s'))
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import TypeMismatch

BOX_KINDS = ("word", "cup", "cap", "wire", "swap", "custom")


@dataclass(frozen=True, order=True)
class BasicType:
    """A basic pregroup type with an adjoint degree: -1 is ``.l``, +1 is ``.r``."""

    name: str
    z: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("basic type needs a nonempty name")
        if not isinstance(self.z, int):
            raise ValueError(f"adjoint degree must be an int, got {self.z!r}")

    @property
    def l(self) -> "BasicType":  # noqa: E743
        return BasicType(self.name, self.z - 1)

    @property
    def r(self) -> "BasicType":
        return BasicType(self.name, self.z + 1)

    def cancels_with(self, right: "BasicType") -> bool:
        """True when ``self @ right`` contracts to the unit (x^z . x^(z+1))."""
        return self.name == right.name and right.z == self.z + 1

    def __str__(self):
        return self.name + (".l" * -self.z if self.z < 0 else ".r" * self.z)

    @classmethod
    def parse(cls, text: str) -> "BasicType":
        name, *suffixes = text.split(".")
        z = 0
        for suffix in suffixes:
            if suffix == "l":
                z -= 1
            elif suffix == "r":
                z += 1
            else:
                raise ValueError(f"bad adjoint suffix in {text!r}")
        return cls(name, z)


class Ty(tuple):
    """
    An ordered list of basic types; ``@`` concatenates.

    >>> n = Ty('n')
    >>> (n @ Ty('s')).r == Ty('s').r @ n.r
    True
    >>> n.l.r == n == n.r.l
    True
    """

    def __new__(cls, *items):
        return super().__new__(cls, (
            x if isinstance(x, BasicType) else BasicType.parse(x) for x in items))

    def __matmul__(self, other: "Ty") -> "Ty":
        return Ty(*self, *other)

    def __add__(self, other):
        return self @ Ty(*other)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return Ty(*tuple.__getitem__(self, key))
        return tuple.__getitem__(self, key)

    @property
    def l(self) -> "Ty":  # noqa: E743
        return Ty(*(x.l for x in reversed(self)))

    @property
    def r(self) -> "Ty":
        return Ty(*(x.r for x in reversed(self)))

    def __repr__(self):
        return "Ty({})".format(", ".join(repr(str(x)) for x in self))

    def __str__(self):
        return " @ ".join(map(str, self)) or "Ty()"

    def to_json(self):
        return [str(x) for x in self]

    @classmethod
    def from_json(cls, data) -> "Ty":
        return cls(*data)


def _ty(x) -> Ty:
    if isinstance(x, Ty):
        return x
    if isinstance(x, BasicType):
        return Ty(x)
    if isinstance(x, str):
        return Ty(x)
    return Ty(*x)


@dataclass(frozen=True)
class Box:
    label: str
    dom: Ty
    cod: Ty
    kind: str = "custom"
    pos: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "dom", _ty(self.dom))
        object.__setattr__(self, "cod", _ty(self.cod))
        if self.kind not in BOX_KINDS:
            raise ValueError(f"unknown box kind {self.kind!r}")
        if self.kind == "cup":
            if len(self.dom) != 2 or self.cod or not self.dom[0].cancels_with(self.dom[1]):
                raise TypeMismatch(self.dom, Ty(), "malformed cup")
        elif self.kind == "cap":
            if len(self.cod) != 2 or self.dom or not self.cod[1].cancels_with(self.cod[0]):
                raise TypeMismatch(Ty(), self.cod, "malformed cap")
        elif self.kind == "wire":
            if len(self.dom) != 1 or self.dom != self.cod:
                raise TypeMismatch(self.dom, self.cod, "malformed wire")
        elif self.kind == "swap":
            if len(self.dom) != 2 or self.cod != Ty(self.dom[1], self.dom[0]):
                raise TypeMismatch(self.dom, self.cod, "malformed swap")
        elif self.kind == "word" and self.dom:
            raise TypeMismatch(self.dom, Ty(), "word boxes are states")

    def to_json(self):
        out = {"label": self.label, "dom": self.dom.to_json(),
               "cod": self.cod.to_json(), "kind": self.kind}
        if self.pos is not None:
            out["pos"] = self.pos
        return out

    @classmethod
    def from_json(cls, data) -> "Box":
        return cls(data["label"], Ty.from_json(data["dom"]),
                   Ty.from_json(data["cod"]), data.get("kind", "custom"),
                   data.get("pos"))


@dataclass(frozen=True)
class Layer:
    left: Ty
    box: Box
    right: Ty

    @property
    def offset(self) -> int:
        return len(self.left)

    @property
    def dom(self) -> Ty:
        return self.left @ self.box.dom @ self.right

    @property
    def cod(self) -> Ty:
        return self.left @ self.box.cod @ self.right


@dataclass(frozen=True)
class Diagram:
    """Typed diagram: ``dom`` to ``cod`` through a sequence of one-box layers."""

    dom: Ty
    cod: Ty
    layers: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "dom", _ty(self.dom))
        object.__setattr__(self, "cod", _ty(self.cod))
        object.__setattr__(self, "layers", tuple(self.layers))
        current = self.dom
        for k, layer in enumerate(self.layers):
            if layer.dom != current:
                raise TypeMismatch(current, layer.dom, f"layer {k} does not type-check")
            current = layer.cod
        if current != self.cod:
            raise TypeMismatch(current, self.cod, "diagram codomain")

    # construction

    @staticmethod
    def id(ty=()) -> "Diagram":
        ty = _ty(ty)
        return Diagram(ty, ty, ())

    @staticmethod
    def from_box(box: Box) -> "Diagram":
        return Diagram(box.dom, box.cod, (Layer(Ty(), box, Ty()),))

    def then(self, other: "Diagram") -> "Diagram":
        return compose_sequential(self, other)

    def tensor(self, other: "Diagram") -> "Diagram":
        return compose_parallel(self, other)

    __rshift__ = then

    def __matmul__(self, other):
        return compose_parallel(self, other)

    # inspection

    @property
    def boxes(self) -> tuple:
        return tuple(layer.box for layer in self.layers)

    @property
    def offsets(self) -> tuple:
        return tuple(layer.offset for layer in self.layers)

    def __len__(self):
        return len(self.layers)

    def normal_form(self) -> "Diagram":
        return normal_form(self)

    def __repr__(self):
        body = ", ".join(f"{layer.box.label}@{layer.offset}" for layer in self.layers)
        return f"Diagram({self.dom!s} -> {self.cod!s}: [{body}])"

    # serialization

    def to_json(self) -> dict:
        return {
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
            "layers": [{"offset": layer.offset, "box": layer.box.to_json()}
                       for layer in self.layers],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Diagram":
        dom = Ty.from_json(data["dom"])
        return _from_offsets(dom, [(item["offset"], Box.from_json(item["box"]))
                                   for item in data["layers"]])

    @classmethod
    def loads(cls, text: str) -> "Diagram":
        return cls.from_json(json.loads(text))


def Id(ty=()) -> Diagram:
    return Diagram.id(ty)


def Word(label: str, cod, pos: str | None = None) -> Diagram:
    return Diagram.from_box(Box(label, Ty(), _ty(cod), "word", pos))


def Cup(t, side: str = "right") -> Diagram:
    """
    Bent wire contracting ``t`` with its adjoint.  ``side='right'`` gives
    ``t @ t.r -> 1`` and ``side='left'`` gives ``t.l @ t -> 1``.

    >>> Cup(Ty('n')).dom
    Ty('n', 'n.r')
    """
    t = _base(t)
    if side == "right":
        dom = Ty(t, t.r)
    elif side == "left":
        dom = Ty(t.l, t)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return Diagram.from_box(Box(f"CUP({dom})", dom, Ty(), "cup"))


def Cap(t, side: str = "right") -> Diagram:
    t = _base(t)
    if side == "right":
        cod = Ty(t.r, t)
    elif side == "left":
        cod = Ty(t, t.l)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return Diagram.from_box(Box(f"CAP({cod})", Ty(), cod, "cap"))


def Swap(a, b) -> Diagram:
    a, b = _base(a), _base(b)
    return Diagram.from_box(Box(f"SWAP({a}, {b})", Ty(a, b), Ty(b, a), "swap"))


def cup(t, side: str = "right") -> Diagram:
    return Cup(t, side)


def cap(t, side: str = "right") -> Diagram:
    return Cap(t, side)


def _base(t) -> BasicType:
    if isinstance(t, BasicType):
        return t
    t = _ty(t)
    if len(t) != 1:
        raise ValueError(f"expected a single basic type, got {t}")
    return t[0]


def _from_offsets(dom: Ty, items: Iterable) -> Diagram:
    """Rebuild a diagram from ``(offset, box)`` pairs, computing the padding."""
    layers = []
    current = dom
    for offset, box in items:
        if offset < 0 or offset + len(box.dom) > len(current):
            raise TypeMismatch(current, box.dom, f"box {box.label} out of range at {offset}")
        layer = Layer(current[:offset], box, current[offset + len(box.dom):])
        if layer.dom != current:
            raise TypeMismatch(current[offset:offset + len(box.dom)], box.dom,
                               f"box {box.label} at offset {offset}")
        layers.append(layer)
        current = layer.cod
    return Diagram(dom, current, tuple(layers))


def compose_sequential(f: Diagram, g: Diagram) -> Diagram:
    """``g`` after ``f``."""
    if f.cod != g.dom:
        raise TypeMismatch(f.cod, g.dom, "cannot compose")
    return Diagram(f.dom, g.cod, f.layers + g.layers)


def compose_parallel(f: Diagram, g: Diagram) -> Diagram:
    """``f`` beside ``g``: ``f``'s boxes run first, then ``g``'s, each padded."""
    layers = [Layer(layer.left, layer.box, layer.right @ g.dom) for layer in f.layers]
    layers += [Layer(f.cod @ layer.left, layer.box, layer.right) for layer in g.layers]
    return Diagram(f.dom @ g.dom, f.cod @ g.cod, tuple(layers))


# Interchange and normal form.

def interchange(items: Sequence, k: int, prefer_left: bool = True):
    """
    Swap layers ``k`` and ``k + 1`` of an ``(offset, box)`` list when their
    boxes act on disjoint wires; returns the new list, or ``None``.

    When both placements are possible (an effect followed by a state at the
    same point) ``prefer_left`` chooses the one putting the later box on
    the left.
    """
    (off_a, a), (off_b, b) = items[k], items[k + 1]
    left_ok = off_b + len(b.dom) <= off_a
    right_ok = off_b >= off_a + len(a.cod)
    if left_ok and (prefer_left or not right_ok):
        new = [(off_b, b), (off_a - len(b.dom) + len(b.cod), a)]
    elif right_ok:
        new = [(off_b - len(a.cod) + len(a.dom), b), (off_a, a)]
    else:
        return None
    return list(items[:k]) + new + list(items[k + 2:])


def is_connected(d: Diagram) -> bool:
    """True when the boxes of ``d`` form a single component (boundary wires excluded)."""
    n = len(d.layers)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    frontier = [None] * len(d.dom)
    for i, layer in enumerate(d.layers):
        o, box = layer.offset, layer.box
        for w in frontier[o:o + len(box.dom)]:
            if w is not None:
                parent[find(w)] = find(i)
        frontier = frontier[:o] + [i] * len(box.cod) + frontier[o + len(box.dom):]
    return len({find(i) for i in range(n)}) <= 1


def _left_move(items, k):
    """Move layer ``k + 1`` below layer ``k`` when it lies entirely to its left."""
    (off_a, a), (off_b, b) = items[k], items[k + 1]
    if off_b + len(b.dom) > off_a:
        return False
    if not a.cod and not b.cod and off_a == off_b and _box_key(b) >= _box_key(a):
        return False  # two effects meeting at one point: order them by label
    items[k:k + 2] = [(off_b, b), (off_a - len(b.dom) + len(b.cod), a)]
    return True


def normal_form(d: Diagram) -> Diagram:
    """
    Left-most normal form: while some box sits entirely to the left of the
    box just below it, move it down.

    For connected diagrams the result does not depend on the slicing, so
    diagrams equal up to interchange get identical normal forms.  Diagrams
    with floating components can cycle; the walk then stops at the smallest
    layering it has met, which is deterministic but not always canonical.

    >>> n = Ty('n')
    >>> f, g = Box('f', n, n), Box('g', n, n)
    >>> one = Diagram.from_box(f) @ Id(n) >> Id(n) @ Diagram.from_box(g)
    >>> two = Id(n) @ Diagram.from_box(g) >> Diagram.from_box(f) @ Id(n)
    >>> normal_form(one) == normal_form(two)
    True
    """
    items = [(layer.offset, layer.box) for layer in d.layers]
    seen = {}
    history = []
    while True:
        key = tuple((o, _box_key(b)) for o, b in items)
        if key in seen:
            cycle = history[seen[key]:]
            items = min(cycle, key=lambda its: tuple((o, _box_key(b)) for o, b in its))
            break
        seen[key] = len(history)
        history.append(list(items))
        if not any(_left_move(items, k) for k in range(len(items) - 1)):
            break
    return _from_offsets(d.dom, items)


def _box_key(box: Box):
    return (box.kind, box.label, tuple(map(str, box.dom)), tuple(map(str, box.cod)))


def equal_up_to_interchange(f: Diagram, g: Diagram) -> bool:
    return normal_form(f) == normal_form(g)
