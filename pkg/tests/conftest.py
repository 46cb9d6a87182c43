import numpy as np
import pytest

from opdyn import MeanState, NetworkSpec
from opdyn import config as cfg


@pytest.fixture(scope="session")
def sec3_doc():
    return cfg.load_preset("norule")


@pytest.fixture(scope="session")
def sec3_spec(sec3_doc):
    return sec3_doc.network_spec()


@pytest.fixture(scope="session")
def sec3_init(sec3_doc):
    return sec3_doc.init_means()


@pytest.fixture(scope="session")
def exp1_doc():
    return cfg.load_preset("exp1")


def random_spec(rng, n):
    """Valid random network: positive inertias, nonnegative couplings."""
    p_f = rng.uniform(0.0, 0.8, (n, n))
    p_g = rng.uniform(0.0, 0.8, (n, n))
    for p in (p_f, p_g):
        p[:] = (p + p.T) / 2.0
        np.fill_diagonal(p, 0.0)
    return NetworkSpec(n=n,
                       omega_f=rng.uniform(0.3, 1.5, n),
                       omega_g=rng.uniform(0.3, 1.5, n),
                       lam=rng.uniform(0.0, 0.5, n),
                       p_f=p_f, p_g=p_g)


def random_number_init(rng, n):
    """Random product number state occupations (bits)."""
    return rng.integers(0, 2, n), rng.integers(0, 2, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20230817)


def mean_state_bits(n_bits, m_bits):
    return MeanState(F=np.asarray(n_bits, dtype=float), G=np.asarray(m_bits, dtype=float))
