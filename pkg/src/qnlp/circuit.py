"""
Lowering sentence diagrams to parameterised circuits.

Each word box becomes an IQP block on fresh qubits starting in |0>, each
cup becomes CNOT followed by an X-basis post-selection on one wire and a
Z-basis post-selection on the other.  The relative pronoun is a fixed GHZ
block.  A circuit keeps the parameter-independent factor relating its raw
post-selected amplitude to the diagram contraction in ``scalar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagram import Diagram
from .errors import UnboundParameter, UnsupportedType
from .gates import SQRT2, Gate, Slot, transpose_gates

DEFAULT_LAYERS = {"noun": 2, "adjective": 2, "transitive_verb": 2, "copula": 2}


@dataclass(frozen=True)
class AnsatzConfig:
    """IQP ansatz shape: layers per part of speech and qubits per basic type."""

    family: str = "IQP"
    layers: dict = field(default_factory=lambda: dict(DEFAULT_LAYERS))
    qubits_per_type: dict = field(default_factory=lambda: {"n": 1, "s": 0})

    def __post_init__(self):
        if self.family != "IQP":
            raise ValueError(f"unsupported ansatz family {self.family!r}")
        for pos, k in self.layers.items():
            if int(k) < 1:
                raise ValueError(f"layers for {pos} must be at least 1, got {k}")
        if self.qubits_per_type.get("n", 1) < 1:
            raise ValueError("nouns need at least one qubit")
        for name, k in self.qubits_per_type.items():
            if int(k) < 0:
                raise ValueError(f"negative qubit count for type {name}")

    def qubits(self, basic) -> int:
        try:
            return int(self.qubits_per_type[basic.name])
        except KeyError:
            raise UnsupportedType(f"no qubit count for type {basic.name!r}") from None

    def width_of(self, ty) -> int:
        return sum(self.qubits(x) for x in ty)

    def layers_for(self, pos) -> int:
        try:
            return int(self.layers[pos])
        except KeyError:
            raise UnsupportedType(f"no ansatz for part of speech {pos!r}") from None

    def to_json(self):
        return {"family": self.family, "layers": dict(self.layers),
                "qubits_per_type": dict(self.qubits_per_type)}

    @classmethod
    def from_json(cls, data) -> "AnsatzConfig":
        return cls(data.get("family", "IQP"),
                   {**DEFAULT_LAYERS, **data.get("layers", {})},
                   {"n": 1, "s": 0, **data.get("qubits_per_type", {})})


def iqp_param_count(wire_count: int, layers: int) -> int:
    return layers if wire_count == 1 else layers * (2 * wire_count - 1)


def iqp_block(word: str, wire_count: int, layers: int, qubits=None) -> list:
    """
    IQP word state: each layer is a Hadamard on every wire, a Z phase per
    wire, then a ZZ phase between neighbours built as CNOT, Z phase, CNOT.
    Slots are ``Slot(word, k)`` in gate order.

    >>> [g.kind for g in iqp_block('Alice', 1, 1)]
    ['hadamard', 'z_phase']
    """
    if wire_count < 1:
        raise ValueError("an IQP block needs at least one wire")
    if layers < 1:
        raise ValueError("an IQP block needs at least one layer")
    qubits = list(range(wire_count)) if qubits is None else list(qubits)
    gates = []
    k = 0
    for _ in range(layers):
        for q in qubits:
            gates.append(Gate("hadamard", (q,)))
        for q in qubits:
            gates.append(Gate("z_phase", (q,), Slot(word, k)))
            k += 1
        for a, b in zip(qubits, qubits[1:]):
            gates.append(Gate("cnot", (a, b)))
            gates.append(Gate("z_phase", (b,), Slot(word, k)))
            gates.append(Gate("cnot", (a, b)))
            k += 1
    return gates


def ghz_block(qubits) -> list:
    """|0..0> + |1..1> up to 1/sqrt2: a Z spider copying one wire onto the others."""
    first, *rest = qubits
    return [Gate("hadamard", (first,))] + [Gate("cnot", (first, q)) for q in rest]


class ParameterStore(dict):
    """Word identifier to parameter vector (radians)."""

    def __init__(self, data=None):
        super().__init__()
        for word, vec in (data or {}).items():
            self[word] = vec

    def __setitem__(self, word, vec):
        vec = np.asarray(vec, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"non-finite parameters for {word!r}")
        super().__setitem__(word, vec)

    @classmethod
    def random(cls, shapes: dict, rng) -> "ParameterStore":
        """Uniform angles in [0, 2pi) for each ``word -> count`` in sorted word order."""
        return cls({w: rng.uniform(0, 2 * math.pi, shapes[w]) for w in sorted(shapes)})

    def copy(self) -> "ParameterStore":
        return ParameterStore({w: v.copy() for w, v in self.items()})

    def flatten(self, words) -> np.ndarray:
        return np.concatenate([self[w] for w in words]) if words else np.zeros(0)

    @classmethod
    def unflatten(cls, vector, shapes: dict, words) -> "ParameterStore":
        out, i = cls(), 0
        for w in words:
            out[w] = vector[i:i + shapes[w]]
            i += shapes[w]
        return out

    def to_json(self):
        return {w: [float(x) for x in v] for w, v in sorted(self.items())}

    @classmethod
    def from_json(cls, data) -> "ParameterStore":
        return cls({w: np.array(v, dtype=float) for w, v in data.items()})


@dataclass
class ParamCircuit:
    """
    Ordered gates on ``width`` qubits starting from |0..0>.

    ``postselections`` are qubits projected onto Z-basis |0> once all gates
    have run; ``x_measure_postselect0`` gates close their qubit in place.
    ``output_wires`` are the qubits left open.  ``scalar`` is the factor
    with raw amplitude = scalar * diagram value.  ``cups`` records which
    qubit pairs were joined by a cup gadget.
    """

    width: int
    gates: list
    postselections: list = field(default_factory=list)
    output_wires: list = field(default_factory=list)
    scalar: complex = 1.0
    cups: list = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        closed = set()
        used = set()
        for i, gate in enumerate(self.gates):
            for q in gate.qubits:
                if q >= self.width:
                    raise ValueError(f"gate {i} acts on qubit {q} outside width {self.width}")
                if q in closed:
                    raise ValueError(f"gate {i} uses qubit {q} after it was measured")
            if gate.kind == "x_prep" and gate.qubits[0] in used:
                raise ValueError(f"x_prep on qubit {gate.qubits[0]} must come first")
            used.update(gate.qubits)
            if gate.kind == "x_measure_postselect0":
                closed.add(gate.qubits[0])
        post = list(self.postselections)
        if len(set(post)) != len(post) or closed & set(post):
            raise ValueError("each post-selected qubit must be measured exactly once")
        outs = set(self.output_wires)
        if outs & (closed | set(post)):
            raise ValueError("output wires cannot be post-selected")
        if closed | set(post) | outs != set(range(self.width)):
            raise ValueError("every qubit must be measured, post-selected or open")

    @property
    def slots(self) -> list:
        return sorted({g.param for g in self.gates if isinstance(g.param, Slot)})

    @property
    def words(self) -> list:
        return sorted({s.word for s in self.slots})

    def bind(self, params) -> list:
        """Gates with numeric angles; raises UnboundParameter for missing slots."""
        out = []
        for g in self.gates:
            if isinstance(g.param, Slot):
                out.append(Gate(g.kind, g.qubits, g.angle(params)))
            else:
                out.append(g)
        return out

    def check_params(self, params):
        for slot in self.slots:
            vec = params.get(slot.word) if params is not None else None
            if vec is None or slot.index >= len(vec):
                raise UnboundParameter(slot)

    def to_json(self):
        return {
            "label": self.label,
            "width": self.width,
            "gates": [g.to_json() for g in self.gates],
            "postselections": list(self.postselections),
            "output_wires": list(self.output_wires),
            "scalar": [float(np.real(self.scalar)), float(np.imag(self.scalar))],
            "cups": [list(c) for c in self.cups],
        }

    @classmethod
    def from_json(cls, data) -> "ParamCircuit":
        re, im = data.get("scalar", [1.0, 0.0])
        return cls(data["width"], [Gate.from_json(g) for g in data["gates"]],
                   list(data.get("postselections", [])), list(data.get("output_wires", [])),
                   complex(re, im), [tuple(c) for c in data.get("cups", [])],
                   data.get("label", ""))


# Compilation.

def word_ansatz(box, cfg: AnsatzConfig, qubits) -> tuple:
    """Gates and scalar preparing ``box``'s state on ``qubits``."""
    if box.pos == "relative_pronoun":
        if len(qubits) < 2:
            raise UnsupportedType(f"relative pronoun {box.label!r} needs at least two noun wires")
        return ghz_block(qubits), 1 / SQRT2
    if box.pos not in cfg.layers:
        raise UnsupportedType(f"no ansatz for {box.label!r} with part of speech {box.pos!r}")
    if not qubits:
        return [], 1.0
    return iqp_block(box.label, len(qubits), cfg.layers_for(box.pos), qubits), 1.0


def param_shapes(lexicon_entries, cfg: AnsatzConfig) -> dict:
    """Parameter count per word for ``(word, pos, type)`` triples."""
    shapes = {}
    for word, pos, ty in lexicon_entries:
        if pos == "relative_pronoun":
            continue
        w = cfg.width_of(ty)
        shapes[word] = iqp_param_count(w, cfg.layers_for(pos)) if w else 0
    return shapes


def compile_sentence(sentence, cfg: AnsatzConfig | None = None, reduce: bool = False) -> ParamCircuit:
    """
    Lower a diagram (or anything with a ``.diagram``) to a ParamCircuit.

    The diagram may start from a nonempty domain; those wires become
    initial |0> qubits left as inputs and are not supported for truth
    values, so sentences are expected to be closed states.
    """
    cfg = cfg or AnsatzConfig()
    diagram = getattr(sentence, "diagram", sentence)
    if not isinstance(diagram, Diagram):
        raise TypeError(f"expected a diagram, got {type(diagram).__name__}")
    if diagram.dom:
        raise UnsupportedType("only diagrams with an empty domain can be compiled")
    wires = []
    gates, post, cups = [], [], []
    scalar = 1.0
    width = 0

    def fresh(k):
        nonlocal width
        width += k
        return list(range(width - k, width))

    for layer in diagram.layers:
        box, o = layer.box, layer.offset
        if box.kind == "word":
            qs = fresh(cfg.width_of(box.cod))
            block, factor = word_ansatz(box, cfg, qs)
            gates += block
            scalar *= factor
            new, i = [], 0
            for t in box.cod:
                k = cfg.qubits(t)
                new.append(qs[i:i + k])
                i += k
            wires[o:o] = new
        elif box.kind == "cup":
            left, right = wires[o], wires[o + 1]
            if len(left) != len(right):
                raise UnsupportedType(f"cup joins wires of different widths at {o}")
            for a, b in zip(left, right):
                gates += [Gate("cnot", (a, b)), Gate("x_measure_postselect0", (a,))]
                post.append(b)
                cups.append((a, b))
                scalar /= SQRT2
            del wires[o:o + 2]
        elif box.kind == "cap":
            k = cfg.qubits(box.cod[0])
            left, right = fresh(k), fresh(k)
            for a, b in zip(left, right):
                gates += [Gate("hadamard", (a,)), Gate("cnot", (a, b))]
                scalar /= SQRT2
            wires[o:o] = [left, right]
        elif box.kind == "swap":
            wires[o], wires[o + 1] = wires[o + 1], wires[o]
        elif box.kind == "wire":
            pass
        else:
            raise UnsupportedType(f"cannot compile box {box.label!r} of kind {box.kind}")
    outputs = [q for w in wires for q in w]
    label = " ".join(getattr(sentence, "tokens", ()) or ())
    circuit = ParamCircuit(width, gates, post, outputs, scalar, cups, label)
    return apply_qubit_reduction(circuit) if reduce else circuit


# Qubit reduction.

def _groups(circuit: ParamCircuit) -> list:
    """Qubit sets linked by two-qubit gates other than cup CNOTs."""
    cup_set = set(circuit.cups)
    parent = list(range(circuit.width))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in circuit.gates:
        if g.kind == "cnot" and g.qubits not in cup_set:
            parent[find(g.qubits[0])] = find(g.qubits[1])
    groups = {}
    for q in range(circuit.width):
        groups.setdefault(find(q), []).append(q)
    return sorted(groups.values(), key=lambda qs: (len(qs), qs[0]))


def _reducible(circuit: ParamCircuit, group) -> dict | None:
    """Partner map when every qubit of ``group`` ends in a cup to a qubit outside it."""
    partner = {}
    for a, b in circuit.cups:
        if a in group and b not in group:
            partner[a] = b
        elif b in group and a not in group:
            partner[b] = a
        elif a in group and b in group:
            return None
    if set(partner) != set(group):
        return None
    for g in circuit.gates:
        if g.kind == "x_prep" and g.qubits[0] in group:
            return None
    return partner


def _reduce_group(circuit: ParamCircuit, group, partner) -> ParamCircuit:
    group = set(group)
    prep, rest = [], []
    cup_pairs = {(a, b) for a, b in circuit.cups if a in group or b in group}
    last_gadget = 0
    skip = set()
    for i, g in enumerate(circuit.gates):
        if g.kind == "cnot" and g.qubits in cup_pairs:
            a, b = g.qubits
            closer = a  # the X-measured qubit of this gadget
            j = next(j for j in range(i + 1, len(circuit.gates))
                     if circuit.gates[j].kind == "x_measure_postselect0"
                     and circuit.gates[j].qubits == (closer,))
            skip.update((i, j))
            last_gadget = max(last_gadget, j)
    for i, g in enumerate(circuit.gates):
        if i in skip:
            continue
        if set(g.qubits) & group:
            prep.append(g)
        else:
            rest.append((i, g))
    bent = [Gate(g.kind, tuple(partner[q] for q in g.qubits), g.param)
            for g in transpose_gates(prep)]
    before = [g for i, g in rest if i < last_gadget]
    after = [g for i, g in rest if i > last_gadget]
    gates = before + bent + after
    post = [q for q in circuit.postselections if q not in group]
    post += [partner[q] for q in sorted(group) if partner[q] not in post]
    cups = [c for c in circuit.cups if c not in cup_pairs]
    scalar = circuit.scalar * SQRT2 ** len(cup_pairs)
    keep = [q for q in range(circuit.width) if q not in group]
    index = {q: i for i, q in enumerate(keep)}

    def remap(g):
        return Gate(g.kind, tuple(index[q] for q in g.qubits), g.param)

    return ParamCircuit(len(keep), [remap(g) for g in gates],
                        [index[q] for q in post], [index[q] for q in circuit.output_wires],
                        scalar, [(index[a], index[b]) for a, b in cups], circuit.label)


def apply_qubit_reduction(circuit: ParamCircuit) -> ParamCircuit:
    """
    Bend word states through their cups.  A group of qubits whose gates only
    prepare a state U|0..0> and whose qubits are all cupped to qubits outside
    the group is removed; U^T then runs on the partner qubits, which are
    post-selected on <0|.  Smallest groups go first.  The amplitude is
    unchanged and the width never grows.
    """
    while True:
        for group in _groups(circuit):
            partner = _reducible(circuit, group)
            if partner is not None:
                circuit = _reduce_group(circuit, group, partner)
                break
        else:
            return circuit


# Export.

def _fmt(x: float) -> str:
    return repr(float(x))


def to_qasm(circuit: ParamCircuit, params=None) -> str:
    """
    OpenQASM 2 text.  Post-selections become measurements followed by a
    ``// postselect`` comment; ``x_phase`` is written as h, u1, h.
    """
    circuit.check_params(params)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if circuit.label:
        lines.append(f"// {circuit.label}")
    lines.append(f"// scalar {_fmt(np.real(circuit.scalar))} {_fmt(np.imag(circuit.scalar))}")
    lines += [f"qreg q[{circuit.width}];", f"creg c[{circuit.width}];"]
    for g in circuit.gates:
        q = [f"q[{i}]" for i in g.qubits]
        note = f"  // {g.param}" if isinstance(g.param, Slot) else ""
        if g.kind == "hadamard":
            lines.append(f"h {q[0]};")
        elif g.kind == "cnot":
            lines.append(f"cx {q[0]},{q[1]};")
        elif g.kind == "z_phase":
            lines.append(f"u1({_fmt(g.angle(params))}) {q[0]};{note}")
        elif g.kind == "x_phase":
            lines += [f"h {q[0]};", f"u1({_fmt(g.angle(params))}) {q[0]};{note}", f"h {q[0]};"]
        elif g.kind == "x_prep":
            lines.append(f"h {q[0]};  // prepare |+>")
        else:
            i = g.qubits[0]
            lines += [f"h {q[0]};", f"measure {q[0]} -> c[{i}];  // postselect 0"]
    for i in circuit.postselections:
        lines.append(f"measure q[{i}] -> c[{i}];  // postselect 0")
    return "\n".join(lines) + "\n"
