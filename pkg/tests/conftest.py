import numpy as np
import pytest

from contactgeom import builtin_manifold
from contactgeom import curve as cv
from contactgeom import legendre as lg


@pytest.fixture(scope="session")
def n3p():
    return builtin_manifold("n3", 1)


@pytest.fixture(scope="session")
def n3m():
    return builtin_manifold("n3", -1)


@pytest.fixture(scope="session")
def q3p():
    return builtin_manifold("q3", 1)


@pytest.fixture(scope="session")
def q3m():
    return builtin_manifold("q3", -1)


@pytest.fixture(scope="session")
def upsilon1():
    return lg.builtin_legendre("upsilon1")


@pytest.fixture(scope="session")
def upsilon2():
    return lg.builtin_legendre("upsilon2")


@pytest.fixture(scope="session")
def generic_unit_curve(n3p):
    """Non-Legendre unit-speed test curve: arc-length reparametrization of
    (sin s, cos s, s/5) in the n3 chart with spacelike Reeb field."""
    base = cv.ExpressionCurve(["sin(s)", "cos(s)", "0.2*s"], domain=(-10.0, 10.0),
                              label="generic")
    return cv.reparametrize_arclength(n3p, base, 0.0, cv.uniform_grid(-0.5, 3.5, 201))


@pytest.fixture(scope="session")
def gen_psi_s():
    """The psi(s) = s generated Legendre curve on (0.1, 3)."""
    return lg.generate_legendre_q3("s", (0.1, 3.0))


@pytest.fixture(scope="session")
def null_curve():
    """Null curve through (1, 0, 0) in the q3 chart with timelike Reeb:
    (1+s, 0, s + s^2/2) has g(v', v') = x^2 v1'^2 - eta(v')^2 = 0."""
    return cv.ExpressionCurve(["1+s", "0", "s+s^2/2"], domain=(-0.9, 3.0),
                              label="nullcurve")


def pytest_configure(config):
    np.set_printoptions(precision=12)
