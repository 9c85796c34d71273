import numpy as np
import pytest

from zeno_codes.code_search import find_encoding_with_restarts, trivial_embedding
from zeno_codes.config import SearchSettings
from zeno_codes.control import default_control_pair
from zeno_codes.error_model import ErrorSet, pauli_error_set, pauli_string


@pytest.fixture
def rng():
    """Seeded generator for random test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def info_z_error():
    """Single Z error on the information qubit of a 2-qubit register."""
    return ErrorSet.from_generators([pauli_string("Z.")], labels=["Z."])


@pytest.fixture
def ancilla_x_error():
    """Single X error on the ancilla qubit of a 2-qubit register."""
    return ErrorSet.from_generators([pauli_string(".X")], labels=[".X"])


@pytest.fixture
def z_errors_3():
    """Z on each of three qubits."""
    return pauli_error_set(3, 1).subset(["Z..", ".Z.", "..Z"])


@pytest.fixture
def identity_code():
    """Trivial (2,1) embedding."""
    return trivial_embedding(2, 1)


@pytest.fixture
def pair_2q():
    return default_control_pair(2, seed=0)


@pytest.fixture(scope="session")
def five_one():
    """Converged weak (5,1) code against all single-qubit Pauli errors."""
    errors = pauli_error_set(5, 1)
    encoding = find_encoding_with_restarts(
        errors, 1, seed=0, settings=SearchSettings(tol=1e-10, max_iter=5000, restarts=20)
    )
    return errors, encoding
