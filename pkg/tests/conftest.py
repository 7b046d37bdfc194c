"""Shared dense-matrix oracles for the stabilizer tests (n <= 3 qubits)."""

import numpy as np
import pytest

from lxesim.paulis import PauliOperator

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def op_matrix(op: PauliOperator) -> np.ndarray:
    """Dense matrix of a signed Pauli; site 0 is the first tensor factor."""
    m = np.array([[op.phase]], dtype=complex)
    for j in range(op.n_sites):
        m = np.kron(m, PAULI_MATS[op.site_kind(j)])
    return m


def state_density(state) -> np.ndarray:
    """Density matrix of a stabilizer state: prod (1 + G_i) / 2^n."""
    n = state.n_sites
    rho = np.eye(2**n, dtype=complex)
    for g in state.generators:
        rho = rho @ (np.eye(2**n) + op_matrix(g)) / 2.0
    return rho / 2 ** (n - state.rank)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
