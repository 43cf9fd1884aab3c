"""Gate vocabulary shared by the compiler, the simulator and the ZX translation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnboundParameter

GATE_KINDS = ("x_prep", "x_phase", "z_phase", "cnot", "hadamard", "x_measure_postselect0")
PARAMETRIC = frozenset({"x_phase", "z_phase"})
ARITY = {"x_prep": 1, "x_phase": 1, "z_phase": 1, "cnot": 2, "hadamard": 1,
         "x_measure_postselect0": 1}

SQRT2 = np.sqrt(2.0)
H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / SQRT2


@dataclass(frozen=True, order=True)
class Slot:
    """Named parameter slot: the ``index``-th angle of ``word``."""

    word: str
    index: int

    def __str__(self):
        return f"{self.word}[{self.index}]"

    @classmethod
    def parse(cls, text: str) -> "Slot":
        word, _, rest = text.rpartition("[")
        return cls(word, int(rest.rstrip("]")))


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    param: float | Slot | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {ARITY[self.kind]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits) or min(self.qubits) < 0:
            raise ValueError(f"bad qubit indices {self.qubits}")
        if (self.kind in PARAMETRIC) != (self.param is not None):
            raise ValueError(f"{self.kind} parameter mismatch: {self.param!r}")

    def angle(self, params=None) -> float:
        if isinstance(self.param, Slot):
            try:
                return float(params[self.param.word][self.param.index])
            except (KeyError, IndexError, TypeError):
                raise UnboundParameter(self.param) from None
        return float(self.param)

    def on(self, *qubits) -> "Gate":
        return Gate(self.kind, qubits, self.param)

    def to_json(self):
        out = {"kind": self.kind, "qubits": list(self.qubits)}
        if isinstance(self.param, Slot):
            out["slot"] = str(self.param)
        elif self.param is not None:
            out["angle"] = self.param
        return out

    @classmethod
    def from_json(cls, data) -> "Gate":
        param = None
        if "slot" in data:
            param = Slot.parse(data["slot"])
        elif "angle" in data:
            param = float(data["angle"])
        return cls(data["kind"], tuple(data["qubits"]), param)


def phase_diag(angle: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * angle)]).astype(complex)


def gate_matrix(gate: Gate, params=None) -> np.ndarray:
    """
    Dense action in the computational basis.

    The two phase gates are diagonal in their own basis: ``z_phase`` is
    diag(1, e^ia) and ``x_phase`` is the same matrix conjugated by H.
    ``x_prep`` returns the prepared column |+>, ``x_measure_postselect0``
    the row <+|.
    """
    kind = gate.kind
    if kind == "z_phase":
        return phase_diag(gate.angle(params))
    if kind == "x_phase":
        return H @ phase_diag(gate.angle(params)) @ H
    if kind == "hadamard":
        return H.copy()
    if kind == "cnot":
        return CNOT.copy()
    if kind == "x_prep":
        return PLUS.reshape(2, 1).copy()
    return PLUS.reshape(1, 2).copy()


def transpose_gates(gates):
    """
    Gate list of U^T for the unitary U given by ``gates``.

    Every unitary kind here has a symmetric matrix, so the transpose is the
    reversed list.
    """
    for gate in gates:
        if gate.kind in ("x_prep", "x_measure_postselect0"):
            raise ValueError("only unitary gate lists can be transposed")
    return list(reversed(gates))
