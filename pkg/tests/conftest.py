import mpmath
import pytest
from gmpy2 import mpq

from cantorflat import geometry
from cantorflat.geometry import ConstructionParams

# independent oracle precision for frozen reference values
mpmath.mp.prec = 320


@pytest.fixture
def default_params():
    return ConstructionParams(1, 4, 3, mpq(1, 22))


@pytest.fixture
def small_params():
    return ConstructionParams(1, 2, 2, mpq(1, 10))


@pytest.fixture(autouse=True)
def _no_metric_hook():
    yield
    geometry.METRICS_HOOK = None


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
