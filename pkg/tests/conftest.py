import math

import pytest
from hypothesis import HealthCheck, settings

from muntz_sector import fuchs, functionals, sequences

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

QUARTER = math.pi / 4


@pytest.fixture(scope="session")
def squares():
    return sequences.power(2.0)


@pytest.fixture(scope="session")
def g_squares(squares):
    """The g kernel for {n^2} on the quarter-angle sector, shared across modules."""
    return functionals.default_g_kernel(squares, QUARTER)


@pytest.fixture(scope="session")
def psi_product(squares):
    return fuchs.TruncatedProduct.for_radius(squares, 50.0)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion that ran."""
    import sys

    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
