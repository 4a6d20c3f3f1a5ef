import numpy as np
import pytest

from dglimit.dgfield import DGField
from dglimit.mesh import build_uniform_mesh


def random_field(mesh, rng, amp=1.0, slope=None, offset=0.0):
    """Random P1 field; slopes scaled so traces stay within a few amplitudes."""
    if slope is None:
        slope = 2.0 * amp / mesh.hx
    c = np.empty((3, mesh.n_cells))
    c[0] = offset + amp * rng.uniform(-1.0, 1.0, mesh.n_cells)
    c[1:] = slope * rng.uniform(-1.0, 1.0, (2, mesh.n_cells))
    return DGField(mesh, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20181016)


@pytest.fixture
def periodic8():
    return build_uniform_mesh((0.0, 1.0, 0.0, 1.0), 8, 8, periodic=(True, True))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-resolution acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", ()):
                if name == "acceptance" and rep.when == "call":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
