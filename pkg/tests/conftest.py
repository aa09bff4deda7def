import numpy as np
import pytest

from nffas.channel import sample_paths
from nffas.geometry import Scenario


@pytest.fixture
def scenario():
    return Scenario()


def random_unit_modulus(rng, shape):
    return np.exp(2j * np.pi * rng.uniform(size=shape))


def random_feasible_q(rng, scenario, trace_frac=None):
    """Random Hermitian PSD covariance with trace a fraction of the budget."""
    n = scenario.n_tx
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q = x @ x.conj().T
    frac = rng.uniform(0.2, 1.0) if trace_frac is None else trace_frac
    return q * (frac * scenario.p_max / np.real(np.trace(q)))


def random_instance(rng, scenario):
    """One channel realization: transmit paths, receive paths."""
    paths_t = sample_paths(rng, scenario.l_t_paths)
    paths_r = sample_paths(rng, scenario.l_r_paths)
    return paths_t, paths_r
