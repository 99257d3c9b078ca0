import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.linalg import expm

from cavqed.circuits import (
    CouplingMap, Gate, GateCircuit, NonHermitianError, cx, from_steps, gate_metrics, ladder_order,
    n_steps_for, pauli_exponential, required_degree, route, select_layout, trotterize,
)
from cavqed.pauli import PauliString, PauliSum
from cavqed.simulate import circuit_unitary

from conftest import pauli_strings


def test_single_z_is_bare_rotation():
    gates = pauli_exponential(1.0, PauliString.from_label("Z"), 0.1)
    assert gates == [Gate("RZ", (0,), 0.2)]


def test_weight_three_uses_four_cx():
    gates = pauli_exponential(0.3, PauliString.from_label("XYZ"), 0.1)
    assert sum(g.kind == "CX" for g in gates) == 4


def test_ladder_puts_z_letters_first():
    assert ladder_order(PauliString.from_label("XIZZ")) == [0, 1, 3]
    assert ladder_order(PauliString.from_label("ZIXY")) == [3, 0, 1]


@given(pauli_strings(3), st.floats(-2, 2, allow_nan=False))
def test_exponential_matches_oracle(s, theta):
    assume(not s.is_identity())  # identity is a global phase and emits no gates
    circ = from_steps(3, [pauli_exponential(theta, s, 1.0)])
    expect = expm(-1j * theta * PauliSum(3, [(1, s)]).to_matrix())
    assert np.allclose(circuit_unitary(circ), expect, atol=1e-10)


def test_step_count():
    assert n_steps_for(2.0, 0.075) == 26
    assert n_steps_for(1.95, 0.075) == 26
    assert n_steps_for(0.0, 0.075) == 0


def test_trotter_step_structure():
    h = PauliSum(2, [(0.5, "ZZ"), (0.3, "XI"), (0.2, "IY")])
    circ = trotterize(h, 1.0, 4)
    assert circ.n_steps == 4 and circ.dt == 0.25
    assert all(circ.step_gates(k) == circ.step_gates(0) for k in range(4))


def test_trotter_converges_to_exact():
    h = PauliSum(2, [(0.5, "ZZ"), (0.3, "XI"), (0.2, "YX")])
    exact = expm(-1j * h.to_matrix())
    err = [np.linalg.norm(circuit_unitary(trotterize(h, 1.0, d)) - exact, 2) for d in (8, 16)]
    assert err[1] < 0.6 * err[0]


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianError):
        trotterize(PauliSum(1, [(1j, "X")]), 1.0, 1)


def test_identity_term_dropped():
    circ = trotterize(PauliSum(1, [(5.0, "I")]), 1.0, 2)
    assert len(circ) == 0 and circ.n_steps == 2


def test_heavy_hex_degrees():
    cmap = CouplingMap.heavy_hex(3, 15)
    assert cmap.max_degree() == 3
    assert len(cmap.nodes) == 45 + 4 + 4


def test_conforming_circuit_unchanged():
    circ = from_steps(3, [[cx(0, 1), Gate("RZ", (2,), 0.3), cx(1, 2)]])
    routed = route(circ, CouplingMap.line(3), layout={0: 0, 1: 1, 2: 2})
    assert routed.gates == circ.gates
    assert routed.meta["swaps_per_step"] == [0]


@st.composite
def random_circuits(draw, n=5):
    steps = []
    for _ in range(draw(st.integers(1, 3))):
        gates = []
        for _ in range(draw(st.integers(1, 6))):
            if draw(st.booleans()):
                a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
                gates.append(cx(a, b))
            else:
                gates.append(Gate("RZ", (draw(st.integers(0, n - 1)),), draw(st.floats(-3, 3))))
                gates.append(Gate("H", (draw(st.integers(0, n - 1)),)))
        steps.append(gates)
    return from_steps(n, steps)


@given(random_circuits())
def test_routing_preserves_unitary_and_connectivity(circ):
    cmap = CouplingMap.line(5)
    routed = route(circ, cmap, layout={q: q for q in range(5)})
    assert np.allclose(circuit_unitary(routed), circuit_unitary(circ), atol=1e-10)
    for g in routed.gates:
        if g.is_two_qubit:
            assert abs(g.qubits[0] - g.qubits[1]) == 1


@given(random_circuits())
def test_routing_on_heavy_hex_with_selected_layout(circ):
    cmap = CouplingMap.heavy_hex(3, 15)
    layout = select_layout(circ, cmap)
    routed = route(circ, cmap, layout)
    assert np.allclose(circuit_unitary(routed), circuit_unitary(circ), atol=1e-10)
    phys = cmap.graph
    for g in routed.gates:
        if g.is_two_qubit:
            assert phys.has_edge(layout[g.qubits[0]], layout[g.qubits[1]])


def test_empty_circuit_metrics():
    m = gate_metrics(GateCircuit(3, ()))
    assert m.total_cx == 0 and m.n_steps == 0 and not m.qubit_load.any()


def test_metrics_count_swaps_as_three():
    circ = from_steps(3, [[cx(0, 1), Gate("SWAP", (1, 2))]])
    m = gate_metrics(circ)
    assert m.total_cx == 4 and m.swaps_per_step == [1]
    assert list(m.qubit_load) == [1, 4, 3] and list(m.qubit_load_no_swap) == [1, 1, 0]
    assert m.to_csv("x").splitlines()[:3] == ["# x", "step,total_cx,swaps,max_qubit_load", "1,4,1,4"]


def test_connectivity_degrees(sw24, sw36, loc13, loc13s3):
    assert max(required_degree(sw24.pauli, sw24.layout).values()) == 13
    assert max(required_degree(sw36.pauli, sw36.layout).values()) == 19
    assert max(required_degree(loc13.pauli, loc13.layout).values()) == 3
    deg = required_degree(loc13s3.pauli, loc13s3.layout)
    assert max(deg[q] for q in loc13s3.matter_qubits) == 4


def _routed_swaps(system):
    circ = trotterize(system.pauli, 0.15, 2, system.layout)
    return route(circ, CouplingMap.preset("heavy_hex", system.n_qubits)).meta["swaps_per_step"]


def test_chain_routes_without_swaps(loc13, loc19):
    assert _routed_swaps(loc13) == [0, 0]
    assert _routed_swaps(loc19) == [0, 0]


def test_three_site_coupling_needs_four_swaps(loc13s3):
    assert _routed_swaps(loc13s3) == [4, 4]
