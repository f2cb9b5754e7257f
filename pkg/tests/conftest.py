import pytest
from hypothesis import HealthCheck, settings

from isotower.tower import Tower, TowerParams

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def tower_5231():
    """Supersingular (q,l,p,N) = (5,2,3,1) with auto k = 6 and levels up to 2."""
    return Tower(TowerParams(5, 2, 3, 1, n_max=2))


@pytest.fixture(scope="session")
def tower_y():
    """(19,5,3,8) over F_{19^4}: two curves, N = 8 > C_q = 6."""
    return Tower(TowerParams(19, 5, 3, 8, n_max=2, k=4))


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
