import numpy as np
import pytest

from qlyap import ControlSystem, build_generator_basis


@pytest.fixture(scope="session")
def basis2():
    return build_generator_basis(2)


@pytest.fixture(scope="session")
def basis3():
    return build_generator_basis(3)


@pytest.fixture(scope="session")
def basis4():
    return build_generator_basis(4)


@pytest.fixture(scope="session")
def ideal_qutrit():
    h0 = np.diag([0.0, 1.0, 2.5])
    h1 = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=complex)
    return ControlSystem(h0, h1)


@pytest.fixture(scope="session")
def exception_pair():
    rho1 = np.array(
        [
            [1 / 12, -1 / 12, -1 / 12],
            [-1 / 12, 11 / 24, 1 / 8],
            [-1 / 12, 1 / 8, 11 / 24],
        ],
        dtype=complex,
    )
    rho2 = np.array(
        [
            [1 / 3, -1j / 12, 1j / 12],
            [1j / 12, 1 / 3, -1j / 4],
            [-1j / 12, 1j / 4, 1 / 3],
        ],
        dtype=complex,
    )
    return rho1, rho2


def random_density(rng, n, distinct=True):
    """Random density matrix; distinct=True draws well-separated weights."""
    if distinct:
        w = np.sort(rng.uniform(0.05, 1.0, n))[::-1]
        w = w / w.sum()
    else:
        w = rng.dirichlet(np.ones(n))
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q @ np.diag(w).astype(complex) @ q.conj().T


def random_hermitian(rng, n, zero_diag=False):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (z + z.conj().T)
    if zero_diag:
        np.fill_diagonal(h, 0.0)
    return h
