import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cavqed.cavity import CavityConfig, LocalizedBasisConfig, MatterLevels, build_localized, build_standing_waves
from cavqed.pauli import PauliString, PauliSum

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pauli_strings(n):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n).map(PauliString.from_label)


@st.composite
def pauli_sums(draw, n=None, max_terms=5, hermitian=False):
    n = draw(st.integers(1, 4)) if n is None else n
    k = draw(st.integers(0, max_terms))
    terms = []
    for _ in range(k):
        label = draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
        re = draw(st.floats(-2, 2, allow_nan=False))
        im = 0.0 if hermitian else draw(st.floats(-2, 2, allow_nan=False))
        terms.append((complex(re, im), label))
    return PauliSum(n, terms)


@pytest.fixture(scope="session")
def matter():
    return MatterLevels()


@pytest.fixture(scope="session")
def sw24(matter):
    return build_standing_waves(matter, CavityConfig())


@pytest.fixture(scope="session")
def sw36(matter):
    return build_standing_waves(matter, CavityConfig(length=19500.0, n_modes=36))


@pytest.fixture(scope="session")
def loc13(matter):
    return build_localized(matter, CavityConfig(), LocalizedBasisConfig(n_loc=13, sigma_support=1))


@pytest.fixture(scope="session")
def loc13s3(matter):
    return build_localized(matter, CavityConfig(), LocalizedBasisConfig(n_loc=13, sigma_support=3))


@pytest.fixture(scope="session")
def loc19(matter):
    return build_localized(matter, CavityConfig(length=19500.0, n_modes=36),
                           LocalizedBasisConfig(n_loc=19, sigma_support=1))


def dense(ps: PauliSum) -> np.ndarray:
    return ps.to_matrix()
