import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavqed.circuits import Gate, cx, from_steps, trotterize
from cavqed.mitigation import FoldPlan, fit_linear, fold, noise_scale, zne
from cavqed.pauli import PauliSum
from cavqed.simulate import (
    NoiseParams, StateVector, circuit_unitary, evolve_statevector, excited_population, expectation,
    noise_profile, prepare_initial_state,
)


def ten_cx():
    return from_steps(3, [[cx(0, 1), Gate("H", (2,)), cx(1, 2), cx(0, 2), cx(2, 1), cx(1, 0)]] * 2)


def test_fraction_zero_is_identity():
    circ = ten_cx()
    assert fold(circ, 0.0) is circ


def test_full_fold_triples_cx():
    circ = ten_cx()
    assert circ.cx_count() == 10
    assert fold(circ, 1.0).cx_count() == 30
    assert noise_scale(fold(circ, 1.0), circ) == 3.0


def test_swaps_are_expanded_and_folded():
    circ = from_steps(2, [[Gate("SWAP", (0, 1))]])
    folded = fold(circ, 1.0)
    assert folded.count("SWAP") == 0 and folded.cx_count() == 9


@given(st.floats(0, 1))
def test_fold_preserves_noiseless_output(f):
    circ = ten_cx()
    folded = fold(circ, f)
    assert np.allclose(circuit_unitary(folded), circuit_unitary(circ), atol=1e-10)
    assert folded.n_steps == circ.n_steps


def test_fold_preserves_cavity_dynamics(loc13):
    circ = trotterize(loc13.pauli, 0.3, 4, loc13.layout)
    psi0 = prepare_initial_state(loc13.layout)
    a = evolve_statevector(circ, psi0)[-1]
    b = evolve_statevector(fold(circ, 0.4), psi0)[-1]
    assert np.max(abs(a.data - b.data)) < 1e-10


@given(st.floats(-1, 1), st.floats(-1, 1), st.lists(st.floats(0, 1), min_size=2, max_size=7, unique=True))
def test_affine_data_recovers_intercept(a, b, xs):
    xs = np.array(sorted(xs))
    if np.ptp(xs) < 1e-3:
        return
    fit = fit_linear(xs, a + b * xs)
    assert abs(fit.intercept[0] - a) < 1e-6 and abs(fit.slope[0] - b) < 1e-6


def test_fit_needs_two_points():
    with pytest.raises(ValueError):
        fit_linear([0.0], [1.0])


@pytest.mark.parametrize("plan", [dict(fractions=(0.1, 0.2)), dict(fractions=(0.0, 0.3, 0.2)),
                                  dict(fractions=(0.0, 1.5)), dict(selection="magic"), dict(runs=0)])
def test_invalid_plans_rejected(plan):
    with pytest.raises(ValueError):
        FoldPlan(**plan)


def test_single_fraction_rejected():
    with pytest.raises(ValueError):
        zne(ten_cx(), StateVector(3), PauliSum(3, [(1, "ZII")]), FoldPlan(fractions=(0.0,)), noise_profile("ideal"))


def test_zero_noise_mitigated_equals_noiseless(loc13):
    circ = trotterize(loc13.pauli, 0.3, 4, loc13.layout)
    psi0 = prepare_initial_state(loc13.layout)
    ne = excited_population(loc13)
    res = zne(circ, psi0, ne, FoldPlan(runs=2), noise_profile("ideal"))
    clean = [expectation(s, ne) for s in evolve_statevector(circ, psi0)]
    assert np.allclose(res.mitigated, clean, atol=1e-12)
    assert np.allclose(res.scales, [1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2], atol=0.05)


def test_zne_csv_has_intercept_rows():
    circ = ten_cx()
    res = zne(circ, StateVector(3), PauliSum(3, [(1, "ZII")]),
              FoldPlan(fractions=(0.0, 0.5), runs=3, seed=1),
              NoiseParams(e1=0.01, e2=0.05), workers=1)
    lines = res.to_csv("h").splitlines()
    assert lines[1] == "t,fraction,mean,stderr"
    assert sum(",-1.0000000000e+00," in l for l in lines) == len(res.times)


def test_abscissa_choice_shares_unmitigated_runs():
    circ = ten_cx()
    obs = PauliSum(3, [(1, "ZII")])
    noise = NoiseParams(e1=0.01, e2=0.05)
    a = zne(circ, StateVector(3), obs, FoldPlan(fractions=(0.0, 0.5, 1.0), runs=4, abscissa="fraction"), noise, workers=1)
    b = zne(circ, StateVector(3), obs, FoldPlan(fractions=(0.0, 0.5, 1.0), runs=4), noise, workers=1)
    assert a.mitigated.shape == b.mitigated.shape
    assert np.allclose(a.unmitigated, b.unmitigated)
