import numpy as np
import pytest

from qsteer import qstate
from qsteer.errors import InvalidState


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_tdiag(rng, low=0.2, high=1.0):
    """Diagonal correlations with random magnitudes and signs, physical by construction."""
    while True:
        t = rng.uniform(low, high, 3) * rng.choice([-1.0, 1.0], 3)
        try:
            qstate.tstate(*t)
        except InvalidState:
            continue
        return t


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
