"""
Dense statevector simulation with post-selection, shot sampling, and the
direct diagram contraction used as the compiler's oracle.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import AnsatzConfig, ParamCircuit, word_ansatz
from .errors import TooLarge, WidthExceeded, ZeroSuccess
from .gates import H, gate_matrix
from .tensor import contract_network

QUBIT_BUDGET = 16
DENSE_BUDGET = 16  # open qubits in a contracted diagram

_PLUS_ROW = np.array([1, 1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class EvalResult:
    amplitude: complex
    success_probability: float
    truth_value_estimate: float
    state: np.ndarray | None = None


def run(circuit: ParamCircuit, params=None, budget: int = QUBIT_BUDGET) -> np.ndarray:
    """
    Raw post-selected state over ``circuit.output_wires`` (first wire most
    significant), not divided by the circuit scalar.  Qubits join the state
    at their first gate and leave it when measured.
    """
    if circuit.width > budget:
        raise WidthExceeded(f"circuit needs {circuit.width} qubits, budget is {budget}")
    circuit.check_params(params)
    state = np.ones((), dtype=complex)
    live = []

    def axis(q):
        nonlocal state
        if q not in live:
            state = np.tensordot(state, np.array([1, 0], dtype=complex), axes=0)
            live.append(q)
        return live.index(q)

    for gate in circuit.gates:
        kind = gate.kind
        if kind == "x_measure_postselect0":
            k = axis(gate.qubits[0])
            state = np.tensordot(_PLUS_ROW, state, axes=([0], [k]))
            live.pop(k)
            continue
        if kind == "x_prep":
            k = axis(gate.qubits[0])
            matrix = H
        else:
            matrix = gate_matrix(gate, params)
        ks = [axis(q) for q in gate.qubits]
        n = len(ks)
        op = matrix.reshape((2,) * (2 * n))
        state = np.tensordot(op, state, axes=(list(range(n, 2 * n)), ks))
        state = np.moveaxis(state, list(range(n)), ks)
    for q in circuit.postselections:
        k = axis(q)
        state = np.take(state, 0, axis=k)
        live.pop(k)
    for q in circuit.output_wires:
        axis(q)
    order = [live.index(q) for q in circuit.output_wires]
    return np.transpose(state, order).reshape(-1) if order else state.reshape(1)


def evaluate(circuit: ParamCircuit, params=None, budget: int = QUBIT_BUDGET) -> EvalResult:
    """
    Exact evaluation.  The amplitude is the all-post-selected coefficient
    (the <0..0| entry of the output state for open circuits) divided by the
    circuit scalar; the truth value is its squared modulus clamped to [0, 1].
    """
    raw = run(circuit, params, budget)
    p_success = float(np.vdot(raw, raw).real)
    amp = complex(raw[0] / circuit.scalar)
    truth = min(max(abs(amp) ** 2, 0.0), 1.0)
    return EvalResult(amp, min(p_success, 1.0), truth, raw / circuit.scalar)


def sample(circuit: ParamCircuit, params, shots: int, seed, budget: int = QUBIT_BUDGET,
           zero_ok: bool = False) -> EvalResult:
    """
    Shot-based estimate for a fully post-selected circuit.

    Each shot passes every post-selection with the exact success probability
    p.  The estimate is the pass frequency divided by |scalar|^2, clamped to
    [0, 1]; with scalar 1 it is the plain relative frequency.  When no shot
    passes, ZeroSuccess is raised unless ``zero_ok`` asks for an estimate of 0.
    """
    if int(shots) < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    if circuit.output_wires:
        raise ValueError("sampling needs a fully post-selected circuit")
    exact = evaluate(circuit, params, budget)
    rng = np.random.default_rng(seed)
    passed = int(rng.binomial(int(shots), exact.success_probability))
    if passed == 0 and not zero_ok:
        raise ZeroSuccess(shots)
    estimate = passed / (shots * abs(circuit.scalar) ** 2)
    return EvalResult(exact.amplitude, passed / shots, min(max(estimate, 0.0), 1.0))


def evaluate_many(circuits, params, workers: int = 1, budget: int = QUBIT_BUDGET) -> list:
    """``evaluate`` over many circuits; results keep the input order."""
    circuits = list(circuits)
    if workers <= 1 or len(circuits) < 2:
        return [evaluate(c, params, budget) for c in circuits]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: evaluate(c, params, budget), circuits))


# Diagram contraction.

def word_state(box, params, cfg: AnsatzConfig | None = None) -> np.ndarray:
    """
    Tensor a word box denotes: its ansatz state divided by the block scalar,
    one axis per output wire of dimension 2^(qubits of that wire).
    """
    cfg = cfg or AnsatzConfig()
    k = cfg.width_of(box.cod)
    qubits = list(range(k))
    gates, factor = word_ansatz(box, cfg, qubits)
    circuit = ParamCircuit(k, gates, [], qubits, factor)
    vec = run(circuit, params) / factor
    return vec.reshape([2 ** cfg.qubits(t) for t in box.cod])


def word_tensors(diagram, params, cfg: AnsatzConfig | None = None) -> dict:
    """Interpretation of every word box in ``diagram`` under ``params``."""
    return {layer.box: word_state(layer.box, params, cfg)
            for layer in diagram.layers if layer.box.kind == "word"}


def contract_diagram(diagram, interp, cfg: AnsatzConfig | None = None,
                     budget: int = DENSE_BUDGET) -> np.ndarray:
    """
    Contract word tensors along the diagram's wiring.

    ``interp`` maps boxes (or their labels) to arrays with one axis per
    output wire followed by one per input wire; word boxes have no inputs.
    A wire of basic type t has dimension 2^(qubits of t) under ``cfg``.
    Cups and caps are identity matrices.  The result has the codomain axes
    followed by the domain axes.  When every remaining axis has dimension
    one (a sentence under the scalar reading) the result is a 0-d array.
    """
    cfg = cfg or AnsatzConfig()
    diagram = getattr(diagram, "diagram", diagram)
    tensors = []
    dims = {}

    def new_label(t):
        label = len(dims)
        dims[label] = 2 ** cfg.qubits(t)
        return label

    def lookup(box):
        arr = interp[box] if box in interp else interp[box.label]
        arr = np.asarray(arr, dtype=complex)
        shape = [2 ** cfg.qubits(t) for t in box.cod @ box.dom]
        return arr.reshape(shape)

    inputs = [new_label(t) for t in diagram.dom]
    wires = list(inputs)
    for layer in diagram.layers:
        box, o = layer.box, layer.offset
        if box.kind == "cup":
            tensors.append((np.eye(dims[wires[o]], dtype=complex), wires[o:o + 2]))
            del wires[o:o + 2]
        elif box.kind == "cap":
            labels = [new_label(t) for t in box.cod]
            tensors.append((np.eye(dims[labels[0]], dtype=complex), labels))
            wires[o:o] = labels
        elif box.kind == "swap":
            wires[o], wires[o + 1] = wires[o + 1], wires[o]
        elif box.kind == "wire":
            pass
        else:
            ins = wires[o:o + len(box.dom)]
            outs = [new_label(t) for t in box.cod]
            tensors.append((lookup(box), outs + ins))
            wires[o:o + len(box.dom)] = outs
        if sum(np.log2(dims[w]) for w in wires + inputs) > budget:
            raise TooLarge(f"more than {budget} open qubits while contracting")
    # identity wires running straight through need an explicit tensor
    through = [w for w in wires if w in inputs]
    out = [w if w not in through else ("out", w) for w in wires]
    for w in through:
        tensors.append((np.eye(dims[w], dtype=complex), [("out", w), w]))
    result = contract_network(tensors, out + inputs)
    return result.reshape(()) if result.size == 1 else result
