import math

import pytest
from hypothesis import HealthCheck, settings

from epi_lab import Gaussian, GaussianMixture, Laplace, Logistic

settings.register_profile(
    "lab", deadline=None, max_examples=30, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lab")

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} criterion {n:2d}: {title}")


FAMILIES = {
    "gauss": Gaussian(1.0),
    "laplace": Laplace(1.0),
    "logistic": Logistic(1.0),
    "mixture": GaussianMixture((0.5, 0.5), (-2.0, 2.0), (1.0, 1.0)),
}
LAMBDAS = [i / 10 for i in range(1, 10)]
HALF_LOG_2PI_E = 0.5 * math.log(2 * math.pi * math.e)


@pytest.fixture(scope="session")
def families():
    return FAMILIES
