import numpy as np
import pytest

from renyigas import thermo
from renyigas.regions import ball


@pytest.fixture(scope="session")
def gauss2():
    return thermo.gaussian(2)


@pytest.fixture(scope="session")
def disk():
    return ball(1.0, 2)


@pytest.fixture(scope="session")
def limit_fermi2():
    return thermo.limit_fermi(thermo.quadratic(2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
