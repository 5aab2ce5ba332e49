import numpy as np
import pytest

from oscinv import Constants, build_inverse_scenario

DOMAIN = (-1.0, 21.0)


@pytest.fixture(scope="session")
def s1():
    """Constant symmetric scenario: unit frequencies, d = delta = 0.2."""
    return build_inverse_scenario(
        Constants(), "1", "1", "0", "0", "1", 0.2, DOMAIN
    )


@pytest.fixture(scope="session")
def s1_uncoupled():
    return build_inverse_scenario(
        Constants(), "1", "1", "0", "0", "1", 0.0, DOMAIN
    )


@pytest.fixture(scope="session")
def s2():
    """Breathing auxiliary solution rho_1 = sqrt(1 + 0.1 sin t)."""
    return build_inverse_scenario(
        Constants(), "1", "1", "0", "0", "sqrt(1 + 0.1*sin(t))", 0.2, DOMAIN
    )


@pytest.fixture(scope="session")
def s3():
    """Fully asymmetric scenario: time-dependent masses and b-couplings."""
    return build_inverse_scenario(
        Constants(alpha0=(1.0, 1.5), Omega=(2.0, 1.7)),
        "1 + 0.05*cos(t)",
        "2",
        "0.1",
        "0.05*sin(t)",
        "1 + 0.05*sin(t/2)",
        0.1,
        DOMAIN,
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
