import pytest

from heckebench.acceptance import calibrated_basis


@pytest.fixture(scope="session")
def delta_form():
    """The weight-12 eigenform, calibrated."""
    return calibrated_basis(12)[0]


@pytest.fixture(scope="session")
def basis24():
    return calibrated_basis(24)


# Ramanujan tau(n), n = 1..12
TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]


@pytest.fixture(scope="session")
def tau():
    return TAU
