import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_contract, equal_up_to_scalar
from qnlp.errors import NotCircuitLike, TooLarge
from qnlp.gates import Gate
from qnlp.zx import (
    ZxGraph, circuit_to_zx, cnot_from_spiders, color_change, extract_circuit, fuse_spiders,
    gate_to_zx, remove_identity_spiders, semantics, simplify, zx_to_gates,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
PLUS, MINUS = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)


def oracle_semantics(g):
    """Brute-force sum over edge values, spiders written out by basis."""
    legs = {v: [] for v in list(g.spiders) + list(g.boundaries)}
    tensors = []
    for e, x in g.edges.items():
        legs[x.u].append((e, 0))
        legs[x.v].append((e, 1))
        tensors.append((np.eye(2) if x.kind == "plain" else H, [(e, 0), (e, 1)]))
    for v, s in g.spiders.items():
        k = len(legs[v])
        if s.color == "Z":
            basis0, basis1 = np.array([1, 0]), np.array([0, 1])
        else:
            basis0, basis1 = PLUS, MINUS
        t0, t1 = np.ones(()), np.ones(())
        for _ in range(k):
            t0, t1 = np.multiply.outer(t0, basis0), np.multiply.outer(t1, basis1)
        tensors.append((t0 + np.exp(1j * s.phase) * t1, legs[v]))
    open_legs = [legs[b][0] for b in g.outputs] + [legs[b][0] for b in g.inputs]
    t = brute_contract(tensors, open_legs)
    return g.scalar * t.reshape(2 ** len(g.outputs), 2 ** len(g.inputs))


@st.composite
def zx_graphs(draw, max_spiders=6, max_wires=8):
    """Random open graphs: up to 6 spiders and 8 edges, boundaries included."""
    g = ZxGraph()
    k = draw(st.integers(1, max_spiders))
    phases = st.sampled_from([0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 0.37])
    vs = [g.add_spider(draw(st.sampled_from("ZX")), draw(phases)) for _ in range(k)]
    n_in = draw(st.integers(0, 2))
    n_out = draw(st.integers(0, 2))
    for _ in range(n_in):
        g.add_edge(g.add_input(), draw(st.sampled_from(vs)))
    for _ in range(n_out):
        g.add_edge(draw(st.sampled_from(vs)), g.add_output())
    budget = max_wires - n_in - n_out
    for _ in range(draw(st.integers(0, budget))):
        u, v = draw(st.sampled_from(vs)), draw(st.sampled_from(vs))
        g.add_edge(u, v, draw(st.sampled_from(["plain", "plain", "hadamard"])))
    return g


@given(zx_graphs())
def test_semantics_matches_brute_force(g):
    assert np.allclose(semantics(g), oracle_semantics(g), atol=1e-10)


@given(zx_graphs())
def test_fusion_preserves_semantics(g):
    after = fuse_spiders(g)
    assert np.allclose(semantics(after), semantics(g), atol=1e-10)
    for x in after.edges.values():
        if x.kind == "plain" and x.u in after.spiders and x.v in after.spiders:
            assert after.spiders[x.u].color != after.spiders[x.v].color


@given(zx_graphs())
def test_identity_removal_preserves_semantics(g):
    after = remove_identity_spiders(g)
    assert np.allclose(semantics(after), semantics(g), atol=1e-10)
    for v, s in after.spiders.items():
        assert not (after.degree(v) == 2 and s.phase == 0)


@given(zx_graphs())
def test_simplify_preserves_semantics(g):
    assert equal_up_to_scalar(semantics(simplify(g)), semantics(g))


@given(zx_graphs(), st.data())
def test_color_change_preserves_semantics(g, data):
    v = data.draw(st.sampled_from(sorted(g.spiders)))
    assert np.allclose(semantics(color_change(g, v)), semantics(g), atol=1e-10)


@given(zx_graphs())
def test_json_roundtrip(g):
    back = ZxGraph.loads(g.dumps())
    assert np.allclose(semantics(back), semantics(g), atol=1e-12)


class TestRules:
    def test_fusion_adds_phases(self):
        g = ZxGraph()
        i, o = g.add_input(), g.add_output()
        a, b = g.add_spider("Z", 0.4), g.add_spider("Z", 1.1)
        g.add_edge(i, a)
        g.add_edge(a, b)
        g.add_edge(b, o)
        f = fuse_spiders(g)
        (s,) = f.spiders.values()
        assert s.color == "Z" and math.isclose(s.phase, 1.5)
        assert np.allclose(semantics(f), np.diag([1, np.exp(1.5j)]))

    def test_fusion_phase_wraps(self):
        g = ZxGraph()
        a, b = g.add_spider("X", 5.0), g.add_spider("X", 2.0)
        g.add_edge(a, b)
        g.add_edge(a, g.add_output())
        (s,) = fuse_spiders(g).spiders.values()
        assert math.isclose(s.phase, 7.0 - 2 * math.pi)

    def test_fusion_fixpoint(self):
        g = cnot_from_spiders()
        f = fuse_spiders(g)
        assert len(f.spiders) == len(g.spiders) and len(f.edges) == len(g.edges)

    def test_identity_spider_becomes_wire(self):
        g = ZxGraph()
        v = g.add_spider("Z")
        g.add_edge(g.add_input(), v)
        g.add_edge(v, g.add_output())
        r = remove_identity_spiders(g)
        assert not r.spiders and len(r.edges) == 1

    def test_phased_spider_stays(self):
        g = ZxGraph()
        v = g.add_spider("Z", math.pi / 2)
        g.add_edge(g.add_input(), v)
        g.add_edge(v, g.add_output())
        assert len(remove_identity_spiders(g).spiders) == 1

    def test_hadamard_edge_is_color_change(self):
        g = ZxGraph()
        a, b = g.add_spider("Z", 0.3), g.add_spider("Z", 0.9)
        g.add_edge(g.add_input(), a)
        g.add_edge(a, b, "hadamard")
        g.add_edge(b, g.add_output())
        h = ZxGraph()
        a2, b2 = h.add_spider("Z", 0.3), h.add_spider("X", 0.9)
        h.add_edge(h.add_input(), a2)
        h.add_edge(a2, b2)
        h.add_edge(b2, h.add_output(), "hadamard")
        assert np.allclose(semantics(g), semantics(h), atol=1e-12)

    def test_single_z_spider(self):
        g = ZxGraph()
        v = g.add_spider("Z", 0.8)
        g.add_edge(g.add_input(), v)
        g.add_edge(v, g.add_output())
        assert np.allclose(semantics(g), np.diag([1, np.exp(0.8j)]))

    def test_cap_is_bell_effect(self):
        g = ZxGraph()
        g.add_edge(g.add_input(), g.add_input())
        assert np.allclose(semantics(g).ravel(), [1, 0, 0, 1])

    def test_dense_budget(self):
        g = ZxGraph()
        for _ in range(7):
            g.add_edge(g.add_input(), g.add_output())
        with pytest.raises(TooLarge):
            semantics(g)


class TestCnot:
    def test_exact_matrix(self):
        assert np.allclose(semantics(cnot_from_spiders()), CNOT, atol=1e-12)

    def test_involution(self):
        g = cnot_from_spiders().then(cnot_from_spiders())
        assert np.allclose(semantics(g), np.eye(4), atol=1e-12)

    def test_hadamards_swap_roles(self):
        gates = [Gate("hadamard", (q,)) for q in (0, 1)] + [Gate("cnot", (0, 1))] \
            + [Gate("hadamard", (q,)) for q in (0, 1)]
        flipped = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
        assert np.allclose(semantics(circuit_to_zx(gates, 2)), flipped, atol=1e-12)


class TestGateTable:
    def test_x_phase_is_diagonal_in_x_basis(self):
        a = 0.9
        m = semantics(gate_to_zx(Gate("x_phase", (0,), a)))
        assert np.allclose(H @ m @ H, np.diag([1, np.exp(1j * a)]), atol=1e-12)

    def test_z_phase(self):
        a = 2.2
        m = semantics(gate_to_zx(Gate("z_phase", (0,), a)))
        assert np.allclose(m, np.diag([1, np.exp(1j * a)]), atol=1e-12)

    def test_x_prep_is_first_x_basis_vector(self):
        v = semantics(gate_to_zx(Gate("x_prep", (0,)))).ravel()
        assert np.allclose(H @ v, [1, 0], atol=1e-12)

    def test_x_measure_is_first_x_basis_effect(self):
        v = semantics(gate_to_zx(Gate("x_measure_postselect0", (0,)))).ravel()
        assert np.allclose(v @ H, [1, 0], atol=1e-12)

    @pytest.mark.parametrize("kind", ["x_phase", "z_phase"])
    def test_zero_phase_is_identity(self, kind):
        assert np.allclose(semantics(gate_to_zx(Gate(kind, (0,), 0.0))), np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("gate", [
        Gate("x_prep", (0,)), Gate("x_phase", (0,), 0.3), Gate("z_phase", (0,), 1.7),
        Gate("cnot", (0, 1)), Gate("cnot", (1, 0)), Gate("x_measure_postselect0", (0,)),
        Gate("hadamard", (0,)),
    ], ids=str)
    def test_round_trip(self, gate):
        assert zx_to_gates(gate_to_zx(gate)) == [gate]


def _random_circuit(rng, width, depth):
    gates = []
    for _ in range(depth):
        kind = rng.choice(["x_phase", "z_phase", "cnot", "hadamard"])
        if kind == "cnot":
            c, t = rng.choice(width, 2, replace=False)
            gates.append(Gate("cnot", (int(c), int(t))))
        elif kind == "hadamard":
            gates.append(Gate("hadamard", (int(rng.integers(width)),)))
        else:
            gates.append(Gate(kind, (int(rng.integers(width)),), float(rng.uniform(0, 2 * np.pi))))
    return gates


@given(st.integers(0, 10 ** 6))
def test_extraction_after_fusion_preserves_semantics(seed):
    rng = np.random.default_rng(seed)
    gates = _random_circuit(rng, 3, int(rng.integers(1, 9)))
    g = circuit_to_zx(gates, 3)
    back = zx_to_gates(fuse_spiders(g))
    assert equal_up_to_scalar(semantics(circuit_to_zx(back, 3)), semantics(g))


def test_postselected_circuit_extracts_effects():
    gates = [Gate("hadamard", (0,)), Gate("cnot", (0, 1))]
    r = extract_circuit(circuit_to_zx(gates, 2, postselect=[1]))
    assert r.postselect == [1]
    with pytest.raises(NotCircuitLike):
        zx_to_gates(circuit_to_zx(gates, 2, postselect=[1]))


def test_non_circuit_graph_rejected():
    g = ZxGraph()
    a, b = g.add_spider("Z", 0.0, qubit=0), g.add_spider("Z", 0.0, qubit=0)
    g.add_edge(a, b)
    g.add_edge(a, b)
    g.add_edge(g.add_input(0), a)
    g.add_edge(b, g.add_output(0))
    with pytest.raises(NotCircuitLike):
        zx_to_gates(g)
