import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavqed.mappers import (
    BosonicLinearMapper, BosonicLogarithmicMapper, BravyiKitaevMapper, MapperError,
    bk_encoding_matrix, map_bosonic_linear, map_bosonic_log, map_fermionic_bk,
)
from cavqed.operators import BosonicOp, FermionicOp

from test_operators import ladder_ops

# ---------------------------------------------------------------- dense oracles


def jw_ladder(kind, j, n):
    """Occupation-basis fermionic ladder matrix (bit j = occupation of mode j)."""
    dim = 1 << n
    m = np.zeros((dim, dim))
    for state in range(dim):
        occ = (state >> j) & 1
        if (kind == "+" and occ) or (kind == "-" and not occ):
            continue
        sign = (-1) ** bin(state & ((1 << j) - 1)).count("1")
        m[state ^ (1 << j), state] = sign
    return m


def bk_permutation(n):
    """``Π |occupations> = |BK bits>``."""
    beta = np.array(bk_encoding_matrix(n))
    dim = 1 << n
    perm = np.zeros((dim, dim))
    for state in range(dim):
        occ = np.array([(state >> i) & 1 for i in range(n)])
        bits = beta @ occ % 2
        perm[sum(int(b) << i for i, b in enumerate(bits)), state] = 1
    return perm


def fermion_dense(op: FermionicOp):
    n = op.n_modes
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for term in op.terms:
        m = np.eye(1 << n, dtype=complex)
        for kind, mode in term.actions:
            m = m @ jw_ladder(kind, mode, n)
        out += term.coefficient * m
    return out


def fock_ladder(kind, levels):
    a = np.diag(np.sqrt(np.arange(1, levels)), 1)
    return a.T if kind == "+" else a


def boson_dense(op: BosonicOp, levels):
    n = op.n_modes
    out = np.zeros((levels ** n,) * 2, dtype=complex)
    for term in op.terms:
        m = np.eye(levels ** n, dtype=complex)
        for kind, mode in term.actions:
            factors = [np.eye(levels)] * n
            factors[mode] = fock_ladder(kind, levels)
            full = np.eye(1)
            for f in reversed(factors):  # mode 0 least significant
                full = np.kron(full, f)
            m = m @ full
        out += term.coefficient * m
    return out


def unary_indices(n_modes, n_max):
    """Qubit-basis indices of valid unary states, in Fock (mode-0-fastest) order."""
    width = n_max + 1
    idx = []
    for levels in itertools.product(range(width), repeat=n_modes):
        levels = levels[::-1]  # mode 0 varies fastest
        idx.append(sum(1 << (m * width + lv) for m, lv in enumerate(levels)))
    return idx


# ---------------------------------------------------------------- golden examples


def test_log_mapper_golden_count():
    p = map_bosonic_log(BosonicOp(1, [(1, "+_0")]), 3)
    assert p.n_qubits == 2 and len(p) == 8


def test_linear_mapper_golden_count():
    p = map_bosonic_linear(BosonicOp(1, [(1, "+_0")]), 3)
    assert p.n_qubits == 4 and len(p) == 12


def test_linear_position_operator():
    p = map_bosonic_linear(BosonicOp(1, [(1, "+_0"), (1, "-_0")]), 1)
    assert {s.label: c for c, s in p.terms} == pytest.approx({"XX": 0.5, "YY": 0.5})


def test_linear_creation_on_unary_subspace():
    m = map_bosonic_linear(BosonicOp(1, [(1, "+_0")]), 1).to_matrix()
    sub = m[np.ix_([1, 2], [1, 2])]  # |01>, |10>
    assert np.allclose(sub, [[0, 0], [1, 0]])


def test_log_single_qubit_creation():
    p = map_bosonic_log(BosonicOp(1, [(1, "+_0")]), 1)
    assert {s.label: c for c, s in p.terms} == pytest.approx({"X": 0.5, "Y": -0.5j})


@pytest.mark.parametrize("n_max", [1, 2, 3, 4])
def test_linear_number_spectrum(n_max):
    m = map_bosonic_linear(BosonicOp.number(0, 1), n_max).to_matrix()
    idx = unary_indices(1, n_max)
    assert np.allclose(m[np.ix_(idx, idx)], np.diag(np.arange(n_max + 1)))


def test_log_number_spectrum():
    m = map_bosonic_log(BosonicOp.number(0, 1), 3).to_matrix()
    assert np.allclose(m, np.diag([0, 1, 2, 3]))


def test_bk_number_operator_is_ii_zz():
    p = map_fermionic_bk(FermionicOp.number(1, 2))
    assert {s.label: c for c, s in p.terms} == pytest.approx({"II": 0.5, "ZZ": -0.5})
    assert np.allclose(np.linalg.eigvalsh(p.to_matrix()), [0, 0, 1, 1])


def test_zero_operator_maps_to_empty_sum():
    p = BravyiKitaevMapper().map(FermionicOp.zero(3))
    assert len(p) == 0 and p.n_qubits == 3


def test_wrong_kind_rejected():
    with pytest.raises(MapperError):
        BravyiKitaevMapper().map(BosonicOp(1, [(1, "+_0")]))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_bk_anticommutators(n):
    m = BravyiKitaevMapper()
    c = [m.map(FermionicOp(n, [(1, f"-_{j}")])) for j in range(n)]
    cd = [m.map(FermionicOp(n, [(1, f"+_{j}")])) for j in range(n)]
    for i in range(n):
        for j in range(n):
            anti = (c[i] @ cd[j] + cd[j] @ c[i]).simplify()
            if i == j:
                assert {s.label: v for v, s in anti.terms} == {"I" * n: 1}
            else:
                assert len(anti) == 0
            assert len((c[i] @ c[j] + c[j] @ c[i]).simplify()) == 0
    num = (cd[0] @ c[0]).to_matrix()
    assert np.allclose(num @ num, num)


# ---------------------------------------------------------------- matrix oracles (random operators)


@given(st.integers(1, 5).flatmap(lambda n: ladder_ops(FermionicOp, n_modes=n)))
def test_bk_matches_occupation_oracle(op):
    perm = bk_permutation(op.n_modes)
    expect = perm @ fermion_dense(op) @ perm.T
    assert np.allclose(BravyiKitaevMapper().map(op).to_matrix(), expect, atol=1e-10)


@given(st.sampled_from([1, 3, 7]).flatmap(
    lambda n_max: st.tuples(st.just(n_max), ladder_ops(BosonicOp, n_modes=2 if n_max < 7 else 1))))
def test_log_matches_fock_oracle(args):
    n_max, op = args
    levels = n_max + 1
    got = BosonicLogarithmicMapper(n_max).map(op).to_matrix()
    assert np.allclose(got, boson_dense(op, levels), atol=1e-10)


@given(st.sampled_from([1, 2, 3]).flatmap(
    lambda n_max: st.tuples(st.just(n_max), ladder_ops(BosonicOp, n_modes=2 if n_max < 3 else 1))))
def test_linear_matches_fock_oracle_on_unary_subspace(args):
    n_max, op = args
    got = BosonicLinearMapper(n_max).map(op).to_matrix()
    idx = unary_indices(op.n_modes, n_max)
    assert np.allclose(got[np.ix_(idx, idx)], boson_dense(op, n_max + 1), atol=1e-10)


def test_log_register_uses_full_binary_space():
    # n_max = 2 needs 2 qubits; the encoding spans all 4 binary levels
    m = map_bosonic_log(BosonicOp(1, [(1, "+_0")]), 2).to_matrix()
    assert np.allclose(m, fock_ladder("+", 4))
    assert BosonicLogarithmicMapper(2).qubits_per_mode == 2
    assert BosonicLogarithmicMapper(4).qubits_per_mode == math.ceil(math.log2(5))
