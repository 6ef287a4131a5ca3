import math

import pytest

from vecslep.kernel import assemble_polarcap
from vecslep.spectral import polarcap_basis

THETA40 = math.radians(40.0)


@pytest.fixture(scope="session")
def cap40():
    """Analytic polar-cap kernel, Theta = 40 deg, L = 18."""
    return assemble_polarcap(THETA40, 18)


@pytest.fixture(scope="session")
def cap40_tangential(cap40):
    return polarcap_basis(THETA40, 18, "tangential", pk=cap40)


@pytest.fixture(scope="session")
def cap40_radial(cap40):
    return polarcap_basis(THETA40, 18, "radial", pk=cap40)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for the terminal summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(number, ok, detail):
        line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
