import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavqed.operators import (
    BosonicOp, FermionicOp, ModeCountError, MixedOp, Register, RegistryError, compose_mixed, parse_label,
)
from cavqed.mappers import BravyiKitaevMapper, BosonicLogarithmicMapper, map_mixed, register_layout


@st.composite
def ladder_ops(draw, cls=FermionicOp, n_modes=None, max_terms=4, max_len=3):
    n = draw(st.integers(1, 4)) if n_modes is None else n_modes
    terms = []
    for _ in range(draw(st.integers(0, max_terms))):
        k = draw(st.integers(0, max_len))
        actions = tuple((draw(st.sampled_from("+-")), draw(st.integers(0, n - 1))) for _ in range(k))
        coef = complex(draw(st.floats(-2, 2, allow_nan=False)), draw(st.floats(-2, 2, allow_nan=False)))
        terms.append((coef, actions))
    return cls(n, terms)


def test_parse_label():
    assert parse_label("+_0 -_1") == (("+", 0), ("-", 1))
    assert parse_label("") == ()
    with pytest.raises(ValueError):
        parse_label("*_0")


def test_adjoint_examples():
    op = FermionicOp(2, [(1, "+_0 -_1")])
    assert op.adjoint() == FermionicOp(2, [(1, "+_1 -_0")])
    b = BosonicOp(1, [(2 + 1j, "+_0")])
    assert b.adjoint() == BosonicOp(1, [(2 - 1j, "-_0")])


def test_position_operator_shape():
    q = BosonicOp(1, [(1, "+_0"), (1, "-_0")])
    assert len(q.simplify()) == 2
    assert q.adjoint() == q


def test_cancellation_and_orbital_energies():
    op = FermionicOp(2, [(1, "+_0 -_1")])
    assert len((op + (-1) * op).simplify()) == 0
    h = FermionicOp.number(0, 2, -0.6738) + FermionicOp.number(1, 2, -0.2798)
    assert len(h.simplify()) == 2


def test_mode_count_mismatch():
    with pytest.raises(ModeCountError):
        FermionicOp(2, [(1, "+_0")]) + FermionicOp(3, [(1, "+_0")])
    with pytest.raises(TypeError):
        FermionicOp(1, [(1, "+_0")]) + BosonicOp(1, [(1, "+_0")])


def test_compose_mixed_rwa_monomial():
    reg = [Register("matter", "fermionic", 2), Register("b", "bosonic", 1)]
    op = compose_mixed(reg, [("matter", FermionicOp(2, [(1, "+_1 -_0")])), ("b", BosonicOp(1, [(1, "-_0")]))], 0.5)
    assert len(op) == 1 and op.terms[0].coefficient == 0.5
    ident = compose_mixed(reg, [], 3.0)
    assert ident.terms[0].factors == () and ident.terms[0].coefficient == 3.0


def test_registry_validation():
    reg = [Register("matter", "fermionic", 2)]
    with pytest.raises(RegistryError):
        compose_mixed(reg, [("nope", FermionicOp(2, [(1, "+_0")]))])
    with pytest.raises(RegistryError):
        compose_mixed(reg, [("matter", BosonicOp(2, [(1, "+_0")]))])
    with pytest.raises(RegistryError):
        MixedOp([reg[0], reg[0]])


def test_three_qubit_register_order():
    reg = [Register("F", "fermionic", 2), Register("B1", "bosonic", 1)]
    mappers = {"fermionic": BravyiKitaevMapper(), "bosonic": BosonicLogarithmicMapper(1)}
    layout = register_layout(reg, mappers)
    assert layout.total_qubits == 3
    assert layout.display_order() == "B10 F1 F0"


@given(ladder_ops())
def test_adjoint_involution(op):
    assert op.adjoint().adjoint() == op


@given(ladder_ops(n_modes=3), ladder_ops(n_modes=3))
def test_mapping_is_multiplicative(a, b):
    m = BravyiKitaevMapper()
    assert m.map(a * b).equiv(m.map(a) @ m.map(b), tol=1e-9)


@given(ladder_ops(n_modes=3))
def test_mapping_commutes_with_adjoint(a):
    m = BravyiKitaevMapper()
    assert m.map(a.adjoint()).equiv(m.map(a).adjoint(), tol=1e-10)


def test_mixed_mapping_is_tensor_product():
    reg = [Register("F", "fermionic", 2), Register("B", "bosonic", 1)]
    mappers = {"fermionic": BravyiKitaevMapper(), "bosonic": BosonicLogarithmicMapper(1)}
    f = FermionicOp(2, [(1, "+_1 -_0")])
    b = BosonicOp(1, [(1, "-_0")])
    mixed = map_mixed(compose_mixed(reg, [("F", f), ("B", b)], 0.7), mappers)
    expect = 0.7 * np.kron(BosonicLogarithmicMapper(1).map(b).to_matrix(), BravyiKitaevMapper().map(f).to_matrix())
    assert np.allclose(mixed.to_matrix(), expect)
