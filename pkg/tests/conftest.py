import numpy as np
import pytest

from gaborphase.density import PointSet


@pytest.fixture(scope="session")
def X_fixture():
    return PointSet.arithmetic(-10, 0.2, 101)


@pytest.fixture(scope="session")
def Omega_fixture():
    return np.linspace(-1, 1, 17)
