import numpy as np
import pytest

from cuspdisc import CircleGrid, FunctionPair, SectorSpec


@pytest.fixture(scope="session")
def power2():
    return FunctionPair.power(2)


@pytest.fixture(scope="session")
def exp1():
    return FunctionPair.exp(1.0)


@pytest.fixture(scope="session")
def grid4096():
    return CircleGrid(4096)


@pytest.fixture(scope="session")
def power_spec(power2):
    return SectorSpec(power2, 1.5)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
