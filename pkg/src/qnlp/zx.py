"""
Open ZX-graphs: phased Z and X spiders joined by plain or Hadamard edges.

Spiders are interpreted without normalisation factors: a Z spider with
phase a is |0..0><0..0| + e^{ia}|1..1><1..1| and an X spider is the same
in the |+>, |-> basis.  Each graph carries an explicit global ``scalar``
so that gate translations evaluate to exactly the gate matrices.

Boundaries are vertices of degree one.  Rewrites copy the graph, work on
the copy, and return it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NotCircuitLike, TooLarge
from .gates import SQRT2, Gate
from .tensor import contract_network

TWO_PI = 2 * math.pi
PHASE_TOL = 1e-12
MAX_BOUNDARY = 12

_H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
_EDGE_MATRIX = {"plain": np.eye(2, dtype=complex), "hadamard": _H}


def normalize_phase(phase: float) -> float:
    phase = math.fmod(float(phase), TWO_PI)
    if phase < 0:
        phase += TWO_PI
    if phase >= TWO_PI - PHASE_TOL:
        phase = 0.0
    return phase


def phases_equal(a: float, b: float, tol: float = PHASE_TOL) -> bool:
    d = abs(normalize_phase(a) - normalize_phase(b))
    return d <= tol or abs(d - TWO_PI) <= tol


@dataclass
class Spider:
    color: str
    phase: float = 0.0
    qubit: int | None = None
    row: float | None = None

    def __post_init__(self):
        if self.color not in ("Z", "X"):
            raise ValueError(f"spider colour must be 'Z' or 'X', got {self.color!r}")
        self.phase = normalize_phase(self.phase)


@dataclass
class Boundary:
    qubit: int | None = None


@dataclass
class Edge:
    u: int
    v: int
    kind: str = "plain"

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


def _combine(k1: str, k2: str) -> str:
    return "plain" if k1 == k2 else "hadamard"


@dataclass
class ZxGraph:
    spiders: dict = field(default_factory=dict)
    boundaries: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    scalar: complex = 1.0
    next_id: int = 0

    # construction

    def _fresh(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def add_spider(self, color, phase=0.0, qubit=None, row=None) -> int:
        v = self._fresh()
        self.spiders[v] = Spider(color, phase, qubit, row)
        return v

    def add_input(self, qubit=None) -> int:
        v = self._fresh()
        self.boundaries[v] = Boundary(qubit)
        self.inputs.append(v)
        return v

    def add_output(self, qubit=None) -> int:
        v = self._fresh()
        self.boundaries[v] = Boundary(qubit)
        self.outputs.append(v)
        return v

    def add_edge(self, u, v, kind="plain") -> int:
        if kind not in _EDGE_MATRIX:
            raise ValueError(f"edge kind must be plain or hadamard, got {kind!r}")
        for x in (u, v):
            if x not in self.spiders and x not in self.boundaries:
                raise KeyError(f"no vertex {x}")
        e = self._fresh()
        self.edges[e] = Edge(u, v, kind)
        return e

    def copy(self) -> "ZxGraph":
        return ZxGraph(
            {v: replace(s) for v, s in self.spiders.items()},
            {v: replace(b) for v, b in self.boundaries.items()},
            {e: replace(x) for e, x in self.edges.items()},
            list(self.inputs), list(self.outputs), self.scalar, self.next_id)

    # inspection

    def incident(self, v) -> list:
        return [e for e, x in self.edges.items() if v in (x.u, x.v)]

    def degree(self, v) -> int:
        return sum((x.u == v) + (x.v == v) for x in self.edges.values())

    def neighbors(self, v) -> list:
        return [self.edges[e].other(v) for e in self.incident(v)]

    def check(self):
        """Raise ValueError when a boundary is malformed."""
        for b in self.boundaries:
            if self.degree(b) != 1:
                raise ValueError(f"boundary {b} has degree {self.degree(b)}")
        listed = self.inputs + self.outputs
        if sorted(listed) != sorted(self.boundaries) or len(set(listed)) != len(listed):
            raise ValueError("every boundary must be listed once as input or output")

    def __len__(self):
        return len(self.spiders)

    # composition

    def _absorb(self, other: "ZxGraph") -> int:
        """Copy ``other``'s vertices and edges in with shifted ids; returns the shift."""
        shift = self.next_id
        for v, s in other.spiders.items():
            self.spiders[v + shift] = replace(s)
        for v, b in other.boundaries.items():
            self.boundaries[v + shift] = replace(b)
        for e, x in other.edges.items():
            self.edges[e + shift] = Edge(x.u + shift, x.v + shift, x.kind)
        self.next_id = shift + other.next_id
        self.scalar = self.scalar * other.scalar
        return shift

    def tensor(self, other: "ZxGraph") -> "ZxGraph":
        g = self.copy()
        shift = g._absorb(other)
        g.inputs = self.inputs + [v + shift for v in other.inputs]
        g.outputs = self.outputs + [v + shift for v in other.outputs]
        return g

    def then(self, other: "ZxGraph") -> "ZxGraph":
        """Plug ``self``'s outputs into ``other``'s inputs, in order."""
        if len(self.outputs) != len(other.inputs):
            raise ValueError(
                f"cannot plug {len(self.outputs)} outputs into {len(other.inputs)} inputs")
        g = self.copy()
        shift = g._absorb(other)
        pairs = list(zip(self.outputs, [v + shift for v in other.inputs]))
        g.inputs = list(self.inputs)
        g.outputs = [v + shift for v in other.outputs]
        for a, b in pairs:
            _join(g, a, b)
        return _normalize_loops(g)

    # serialization

    def to_json(self) -> dict:
        return {
            "spiders": [{"id": v, "color": s.color, "phase": s.phase,
                         "qubit": s.qubit, "row": s.row}
                        for v, s in sorted(self.spiders.items())],
            "boundaries": [{"id": v, "qubit": b.qubit}
                           for v, b in sorted(self.boundaries.items())],
            "edges": [{"u": x.u, "v": x.v, "kind": x.kind}
                      for _, x in sorted(self.edges.items())],
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "scalar": [float(np.real(self.scalar)), float(np.imag(self.scalar))],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "ZxGraph":
        g = cls()
        for s in data["spiders"]:
            g.spiders[s["id"]] = Spider(s["color"], s["phase"], s.get("qubit"), s.get("row"))
        for b in data["boundaries"]:
            g.boundaries[b["id"]] = Boundary(b.get("qubit"))
        g.next_id = max(list(g.spiders) + list(g.boundaries) + [-1]) + 1
        for x in data["edges"]:
            g.add_edge(x["u"], x["v"], x["kind"])
        g.inputs, g.outputs = list(data["inputs"]), list(data["outputs"])
        re, im = data.get("scalar", [1.0, 0.0])
        g.scalar = complex(re, im)
        g.check()
        return g

    @classmethod
    def loads(cls, text) -> "ZxGraph":
        return cls.from_json(json.loads(text))


def _join(g: ZxGraph, a: int, b: int):
    """Remove boundaries ``a`` and ``b`` and connect what they were attached to."""
    (e1,) = g.incident(a)
    (e2,) = g.incident(b)
    for v in (a, b):
        del g.boundaries[v]
        if v in g.inputs:
            g.inputs.remove(v)
        if v in g.outputs:
            g.outputs.remove(v)
    if e1 == e2:
        # a bare wire bent into a circle
        x = g.edges.pop(e1)
        g.scalar *= 2 if x.kind == "plain" else 0
        return
    x1, x2 = g.edges.pop(e1), g.edges.pop(e2)
    g.edges[g._fresh()] = Edge(x1.other(a), x2.other(b), _combine(x1.kind, x2.kind))


# Semantics.

def spider_tensor(color: str, phase: float, degree: int) -> np.ndarray:
    if color == "Z":
        t = np.zeros((2,) * degree, dtype=complex)
        t[(0,) * degree] += 1
        t[(1,) * degree] += np.exp(1j * phase)
        return t
    parity = np.indices((2,) * degree).sum(axis=0) if degree else np.zeros(())
    return (1 + np.exp(1j * phase) * (-1.0) ** parity) / SQRT2 ** degree


def semantics(g: ZxGraph) -> np.ndarray:
    """
    Dense linear map of ``g`` as a (2^outputs, 2^inputs) matrix, with the
    first input or output wire as the most significant bit.
    """
    g.check()
    n_in, n_out = len(g.inputs), len(g.outputs)
    if n_in + n_out > MAX_BOUNDARY:
        raise TooLarge(f"{n_in + n_out} boundary wires exceed the dense budget of {MAX_BOUNDARY}")
    legs = {v: [] for v in list(g.spiders) + list(g.boundaries)}
    tensors = []
    for e, x in g.edges.items():
        a, b = ("e", e, 0), ("e", e, 1)
        legs[x.u].append(a)
        legs[x.v].append(b)
        tensors.append((_EDGE_MATRIX[x.kind], [a, b]))
    for v, s in g.spiders.items():
        tensors.append((spider_tensor(s.color, s.phase, len(legs[v])), legs[v]))
    open_legs = [legs[b][0] for b in g.outputs] + [legs[b][0] for b in g.inputs]
    t = contract_network(tensors, open_legs)
    return g.scalar * np.asarray(t).reshape(2 ** n_out, 2 ** n_in)


# Rewrites.

def _normalize_loops(g: ZxGraph) -> ZxGraph:
    """
    Drop plain self-loops (a spider's trace is itself); a Hadamard self-loop
    adds pi to the phase and a factor 1/sqrt2.  Isolated spiders become
    scalars.
    """
    for e in [e for e, x in g.edges.items() if x.u == x.v]:
        x = g.edges.pop(e)
        if x.kind == "hadamard":
            s = g.spiders[x.u]
            s.phase = normalize_phase(s.phase + math.pi)
            g.scalar /= SQRT2
    for v in [v for v in g.spiders if g.degree(v) == 0]:
        s = g.spiders.pop(v)
        g.scalar *= complex(spider_tensor(s.color, s.phase, 0))
    return g


def fuse_spiders(g: ZxGraph) -> ZxGraph:
    """Merge same-colour spiders joined by a plain edge until none remain."""
    g = _normalize_loops(g.copy())
    while True:
        match = next((e for e, x in g.edges.items()
                      if x.kind == "plain" and x.u != x.v
                      and x.u in g.spiders and x.v in g.spiders
                      and g.spiders[x.u].color == g.spiders[x.v].color), None)
        if match is None:
            return g
        x = g.edges.pop(match)
        keep, gone = sorted((x.u, x.v))
        g.spiders[keep].phase = normalize_phase(g.spiders[keep].phase + g.spiders[gone].phase)
        for y in g.edges.values():
            if y.u == gone:
                y.u = keep
            if y.v == gone:
                y.v = keep
        del g.spiders[gone]
        _normalize_loops(g)


def remove_identity_spiders(g: ZxGraph) -> ZxGraph:
    """Replace every phase-free spider of degree two by a single edge."""
    g = _normalize_loops(g.copy())
    while True:
        match = next((v for v, s in g.spiders.items()
                      if phases_equal(s.phase, 0.0) and g.degree(v) == 2
                      and len(g.incident(v)) == 2), None)
        if match is None:
            return g
        e1, e2 = g.incident(match)
        x1, x2 = g.edges.pop(e1), g.edges.pop(e2)
        del g.spiders[match]
        g.edges[g._fresh()] = Edge(x1.other(match), x2.other(match), _combine(x1.kind, x2.kind))
        _normalize_loops(g)


def color_change(g: ZxGraph, v: int) -> ZxGraph:
    """Flip the colour of spider ``v`` and toggle the kind of its non-loop edges."""
    g = g.copy()
    s = g.spiders[v]
    s.color = "X" if s.color == "Z" else "Z"
    for x in g.edges.values():
        if (x.u == v) != (x.v == v):
            x.kind = "hadamard" if x.kind == "plain" else "plain"
    return g


def simplify(g: ZxGraph) -> ZxGraph:
    """Fusion and identity removal to a fixpoint."""
    while True:
        size = (len(g.spiders), len(g.edges))
        g = remove_identity_spiders(fuse_spiders(g))
        if (len(g.spiders), len(g.edges)) == size:
            return g


# Gate translation.

def cnot_from_spiders(control: int = 0, target: int = 1, row: float = 0.0) -> ZxGraph:
    """CNOT as a Z spider on the control joined to an X spider on the target."""
    g = ZxGraph(scalar=SQRT2)
    c_in, t_in = g.add_input(control), g.add_input(target)
    z = g.add_spider("Z", 0.0, control, row)
    x = g.add_spider("X", 0.0, target, row)
    c_out, t_out = g.add_output(control), g.add_output(target)
    g.add_edge(c_in, z)
    g.add_edge(z, c_out)
    g.add_edge(t_in, x)
    g.add_edge(x, t_out)
    g.add_edge(z, x)
    return g


def gate_to_zx(gate: Gate, params=None) -> ZxGraph:
    """ZX-graph of a single gate; boundaries follow ``gate.qubits`` in order."""
    return circuit_to_zx([gate], params=params, qubits=gate.qubits)


def circuit_to_zx(gates, width: int | None = None, params=None, postselect=(),
                  qubits=None) -> ZxGraph:
    """
    Translate a gate list gate by gate.

    A qubit is open at the bottom unless its first gate is ``x_prep``, and
    open at the top unless it is closed by ``x_measure_postselect0`` or
    listed in ``postselect`` (a Z-basis <0| effect after its last gate).
    ``x_prep`` and ``x_measure_postselect0`` are one-legged Z spiders, <0|
    a one-legged X spider, each carrying 1/sqrt2 in the scalar.
    """
    gates = list(gates)
    if qubits is None:
        top = max([q for gate in gates for q in gate.qubits] + list(postselect) + [-1])
        qubits = range(max(top + 1, width or 0))
    g = ZxGraph()
    first = {}
    for gate in gates:
        for q in gate.qubits:
            first.setdefault(q, gate.kind)
    frontier = {}
    for q in qubits:
        if first.get(q) != "x_prep":
            frontier[q] = (g.add_input(q), "plain")

    def attach(q, v):
        if q not in frontier:
            raise ValueError(f"qubit {q} is not open at this point")
        u, kind = frontier.pop(q)
        g.add_edge(u, v, kind)

    for row, gate in enumerate(gates):
        kind, qs = gate.kind, gate.qubits
        if kind == "cnot":
            c, t = qs
            z = g.add_spider("Z", 0.0, c, row)
            x = g.add_spider("X", 0.0, t, row)
            attach(c, z)
            attach(t, x)
            g.add_edge(z, x)
            frontier[c], frontier[t] = (z, "plain"), (x, "plain")
            g.scalar *= SQRT2
            continue
        (q,) = qs
        if kind == "hadamard":
            u, k = frontier[q]
            frontier[q] = (u, _combine(k, "hadamard"))
        elif kind == "x_prep":
            if q in frontier:
                raise ValueError(f"qubit {q} prepared while already in use")
            frontier[q] = (g.add_spider("Z", 0.0, q, row), "plain")
            g.scalar /= SQRT2
        elif kind == "x_measure_postselect0":
            attach(q, g.add_spider("Z", 0.0, q, row))
            g.scalar /= SQRT2
        else:
            v = g.add_spider("Z" if kind == "z_phase" else "X", gate.angle(params), q, row)
            attach(q, v)
            frontier[q] = (v, "plain")
    for q in postselect:
        attach(q, g.add_spider("X", 0.0, q, len(gates)))
        g.scalar /= SQRT2
    for q in sorted(frontier, key=list(qubits).index):
        u, kind = frontier.pop(q)
        g.add_edge(u, g.add_output(q), kind)
    return g


@dataclass
class Extracted:
    """Gate list recovered from a circuit-like graph, plus its <0| effects."""

    gates: list
    postselect: list
    qubits: list


def extract_circuit(g: ZxGraph) -> Extracted:
    """
    Read a gate list back from a graph whose vertices carry qubit and row
    annotations, as produced by :func:`circuit_to_zx` and kept by fusion.

    Each qubit's vertices must form a simple path; spiders may additionally
    have plain edges to opposite-coloured phase-free partners on other
    qubits, which become CNOTs.  Anything else raises NotCircuitLike.  The
    result matches ``g`` up to a global scalar.
    """
    g.check()
    lines = {}
    for v, s in g.spiders.items():
        if s.qubit is None:
            raise NotCircuitLike(f"spider {v} has no qubit annotation")
        lines.setdefault(s.qubit, []).append(v)
    for v, b in g.boundaries.items():
        if b.qubit is None:
            raise NotCircuitLike(f"boundary {v} has no qubit annotation")
        lines.setdefault(b.qubit, []).append(v)
    qubit_of = {v: q for q, vs in lines.items() for v in vs}
    for x in g.edges.values():
        if x.u == x.v:
            raise NotCircuitLike("self-loop")

    events = {}
    postselect = []
    for q, members in sorted(lines.items()):
        events[q], closed = _walk_line(g, q, set(members), qubit_of)
        if closed:
            postselect.append(q)

    gates = _schedule(events)
    return Extracted(gates, postselect, sorted(lines))


def _walk_line(g, q, members, qubit_of):
    """Events along qubit ``q``: single-qubit gates and CNOT edge ids."""
    starts = [v for v in members if v in g.inputs]
    if len(starts) > 1:
        raise NotCircuitLike(f"qubit {q} has several inputs")
    along = {v: [e for e in g.incident(v) if qubit_of[g.edges[e].other(v)] == q]
             for v in members}
    if not starts:
        starts = [v for v in members if v in g.spiders and len(along[v]) <= 1]
        starts.sort(key=lambda v: (g.spiders[v].row is None, g.spiders[v].row, v))
        if not starts:
            raise NotCircuitLike(f"qubit {q} has no starting point")
    v, prev_edge = starts[0], None
    seen = [v]
    out, closed = [], False
    while True:
        if v in g.spiders:
            s = g.spiders[v]
            partners = [e for e in g.incident(v) if qubit_of[g.edges[e].other(v)] != q]
            at_start = prev_edge is None
            nxt = [e for e in along[v] if e != prev_edge]
            if s.color == "X" and at_start:
                raise NotCircuitLike(f"qubit {q} starts with an X spider")
            if at_start:
                out.append(("gate", Gate("x_prep", (q,))))
            for e in sorted(partners, key=lambda e: _row(g, g.edges[e].other(v))):
                x = g.edges[e]
                w = g.spiders.get(x.other(v))
                if x.kind != "plain" or w is None or w.color == s.color:
                    raise NotCircuitLike(f"edge {e} is not a CNOT leg")
                out.append(("cnot", (e, s.color == "Z")))
            if not phases_equal(s.phase, 0.0):
                kind = "z_phase" if s.color == "Z" else "x_phase"
                out.append(("gate", Gate(kind, (q,), s.phase)))
            if not nxt:
                if s.color == "Z":
                    out.append(("gate", Gate("x_measure_postselect0", (q,))))
                else:
                    closed = True
                break
        else:
            nxt = [e for e in along[v] if e != prev_edge]
            if v in g.outputs:
                if nxt:
                    raise NotCircuitLike(f"output on qubit {q} is not at the end")
                break
            if prev_edge is not None:
                raise NotCircuitLike(f"input on qubit {q} is not at the start")
        if len(nxt) != 1:
            raise NotCircuitLike(f"qubit {q} does not form a simple path at vertex {v}")
        e = nxt[0]
        if g.edges[e].kind == "hadamard":
            out.append(("gate", Gate("hadamard", (q,))))
        v, prev_edge = g.edges[e].other(v), e
        if v in seen:
            raise NotCircuitLike(f"qubit {q} loops back on itself")
        seen.append(v)
    if set(seen) != members:
        raise NotCircuitLike(f"qubit {q} has vertices off its path")
    return out, closed


def _row(g, v):
    s = g.spiders.get(v)
    return (s is None or s.row is None, s.row if s is not None and s.row is not None else 0, v)


def _schedule(events):
    """Interleave per-qubit event lists; a CNOT fires when it heads both of its lines."""
    heads = {q: 0 for q in events}
    owners = {}
    for q, evs in events.items():
        for kind, item in evs:
            if kind == "cnot":
                owners.setdefault(item[0], {})[q] = item[1]
    gates = []
    remaining = sum(len(evs) for evs in events.values())
    while remaining:
        progress = False
        for q in sorted(events):
            while heads[q] < len(events[q]):
                kind, item = events[q][heads[q]]
                if kind == "gate":
                    gates.append(item)
                    heads[q] += 1
                    remaining -= 1
                    progress = True
                    continue
                roles = owners[item[0]]
                (other,) = set(roles) - {q}
                if heads[other] >= len(events[other]):
                    break
                head_kind, head_item = events[other][heads[other]]
                if head_kind != "cnot" or head_item[0] != item[0]:
                    break
                control = q if roles[q] else other
                gates.append(Gate("cnot", (control, other if control == q else q)))
                heads[q] += 1
                heads[other] += 1
                remaining -= 2
                progress = True
        if not progress:
            raise NotCircuitLike("CNOT legs cannot be ordered consistently")
    return gates


def zx_to_gates(g: ZxGraph) -> list:
    """
    Gate list of a circuit-like graph.  Graphs ending in a Z-basis <0| effect
    are outside the gate vocabulary; use :func:`extract_circuit` for those.
    """
    result = extract_circuit(g)
    if result.postselect:
        raise NotCircuitLike(f"qubits {result.postselect} end in a Z-basis effect")
    return result.gates
