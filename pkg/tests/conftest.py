import sys

import pytest

from warpmesh.lattice import build_square_lattice
from warpmesh.sim import run_impulse_response


@pytest.fixture(scope="session")
def lat6():
    return build_square_lattice(6)


@pytest.fixture(scope="session")
def lat12():
    return build_square_lattice(12)


@pytest.fixture(scope="session")
def lat24():
    return build_square_lattice(24)


@pytest.fixture(scope="session")
def twm24_probe(lat24):
    return run_impulse_response(lat24, "twm", steps=1 << 14)


@pytest.fixture(scope="session")
def wtwm24_probe(lat24):
    return run_impulse_response(lat24, "wtwm", alpha=-0.45, steps=1 << 14)



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
