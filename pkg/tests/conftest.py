import numpy as np
import pytest

from homfinsler.fixtures import load_fixture
from homfinsler.lie import LieAlgebra, ReductiveSplit

HEISENBERG = [(1, 2, 3, 1.0)]
SO3 = [(1, 2, 3, 1.0), (2, 3, 1, 1.0), (3, 1, 2, 1.0)]


@pytest.fixture
def heisenberg():
    return LieAlgebra.from_sparse(3, HEISENBERG)


@pytest.fixture
def so3():
    return LieAlgebra.from_sparse(3, SO3)


@pytest.fixture
def abelian():
    return LieAlgebra(np.zeros((3, 3, 3)))


@pytest.fixture
def trivial3():
    return ReductiveSplit.trivial(3)


@pytest.fixture
def space():
    def load(name):
        return load_fixture(name).space

    return load


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
