import numpy as np
import pytest

from nmrsqueeze.hamiltonians import HamiltonianSpec
from nmrsqueeze.spin_algebra import SpinQuantum
from nmrsqueeze.states import EnvironmentSpec

GAMMA_NA = 11.26e6  # Hz/T
SPINS = [SpinQuantum(k) for k in (1, 2, 3, 4, 5, 6)]


def random_hermitian(rng, dim, scale=1.0):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (X + X.conj().T) / 2


def random_unitary(rng, dim):
    Q, R = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_density(rng, dim, rank=None):
    rank = rank or dim
    X = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def spin32():
    return SpinQuantum(3)


@pytest.fixture
def working_env():
    return EnvironmentSpec(B0=7.0, temperature=0.1, gamma_n=GAMMA_NA)


@pytest.fixture
def working_spec(working_env):
    return HamiltonianSpec.from_nuQ(200e3, omega0=working_env.omega0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _report(tag, ok, detail):
        line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n    {line}")
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
