import numpy as np
import pytest

from hardy_kernels import HardyCoupling, LevyModel
from hardy_kernels.spectral import default_radii, ground_state_solve

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def coulomb_model():
    return LevyModel(3, 1.0, "relativistic", m=1.0)


@pytest.fixture(scope="session")
def coulomb_coupling():
    return HardyCoupling.from_kappa(3, 1.0, 0.5)


@pytest.fixture(scope="session")
def ground_state_256(coulomb_model, coulomb_coupling):
    return ground_state_solve(coulomb_model, coulomb_coupling, radii=default_radii(256))


@pytest.fixture(scope="session")
def ground_state_512(coulomb_model, coulomb_coupling):
    return ground_state_solve(coulomb_model, coulomb_coupling, radii=default_radii(512))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
