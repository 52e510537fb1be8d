import numpy as np
import pytest

from grtrecon import circular_grt, classical_radon, disk_phantom, find_tangencies

SQRT2 = np.sqrt(2.0)
R_SCAN = 10.0
R_REC = 3.7
P_MIN = R_SCAN - R_REC * SQRT2
P_MAX = R_SCAN + R_REC * SQRT2
BETA0 = -0.17 * np.pi


@pytest.fixture(scope="session")
def circ_model():
    return circular_grt(R_SCAN)


@pytest.fixture(scope="session")
def radon_model():
    return classical_radon()


@pytest.fixture(scope="session")
def sec9_phantom():
    return disk_phantom((1.0, 1.0), 2.0, inside=1.0, outside=0.0)


@pytest.fixture(scope="session")
def sec9_x0(sec9_phantom):
    c = np.array(sec9_phantom.center)
    return c + sec9_phantom.radius * np.array([np.cos(BETA0), np.sin(BETA0)])


@pytest.fixture(scope="session")
def sec9_fan(circ_model, sec9_phantom, sec9_x0):
    return find_tangencies(circ_model, sec9_phantom, sec9_x0)
