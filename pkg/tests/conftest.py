import numpy as np
import pytest

from bloch_topo.dirac_point import extract
from bloch_topo.fields import canonical_potential, canonical_vector_potential
from bloch_topo.lattice import build_honeycomb_lattice, edge_frame

# Gap-closing strength of the canonical fixture, produced by the scan-and-polish
# estimator and checked independently in test_bloch (the gap vanishes there).
DELTA_SHARP = 3.526978093767573

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def geometry():
    return build_honeycomb_lattice()


@pytest.fixture(scope="session")
def V():
    return canonical_potential(10.0)


@pytest.fixture(scope="session")
def A():
    return canonical_vector_potential(1.0)


@pytest.fixture(scope="session")
def dirac(V, A):
    return extract(V, A)


@pytest.fixture(scope="session")
def zigzag(geometry):
    return edge_frame(geometry, 1, 0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
