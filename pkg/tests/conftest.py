import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from susytj.kernels import random_params, table_params
from susytj.reference import reference_rows
from susytj.roots import newton_refine
from susytj.transfer import build_transfer, diagonalize, hamiltonian_direct, hamiltonian_from_transfer
from susytj.tq import TQContext

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Setup:
    """Everything derived from one parameter set, built once per session."""

    def __init__(self, params):
        self.params = params
        self.ctx = TQContext(params)
        self.family = build_transfer(params)
        self.H = hamiltonian_from_transfer(params, self.family)
        self.H_direct = hamiltonian_direct(params)
        self.ed = diagonalize(self.H_direct, keep_vectors=True, source="direct")
        rows = reference_rows(params.L)
        self.rows = rows
        self.refined = [newton_refine(r.roots, self.ctx) for r in rows]


@pytest.fixture(scope="session")
def table_L2():
    return Setup(table_params(2))


@pytest.fixture(scope="session")
def table_L3():
    return Setup(table_params(3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def random_sets():
    gen = np.random.default_rng(2024)
    return [random_params(gen) for _ in range(10)]
