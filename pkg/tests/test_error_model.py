"""Tests for error sets and counting bounds."""
import math

import numpy as np
import pytest

from zeno_codes.config import Limits
from zeno_codes.error_model import (
    ErrorSet,
    error_count,
    hamming_feasible,
    pauli_error_set,
    pauli_string,
    random_error_set,
)
from zeno_codes.exceptions import (
    CapExceededError,
    InvalidParameterError,
    NotHermitianError,
)
from zeno_codes.linalg import SIGMA_I, SIGMA_X, kron


def test_pauli_error_set_single_qubit():
    errors = pauli_error_set(1, 1)
    assert errors.M == 3
    assert errors.labels == ("X", "Y", "Z")


@pytest.mark.parametrize("n,expected", [(7, 21), (9, 27)])
def test_pauli_error_set_counts(n, expected):
    errors = pauli_error_set(n, 1)
    assert errors.M == expected == error_count(n, 2, 1)
    assert len(set(errors.labels)) == expected


def test_pauli_error_set_weight_two():
    assert pauli_error_set(3, 2).M == error_count(3, 2, 2) == 9 + 27


def test_pauli_generators_are_involutions():
    for e in pauli_error_set(3, 1):
        assert np.allclose(e @ e, np.eye(8))
        assert abs(np.trace(e)) < 1e-12


def test_pauli_string_ordering():
    assert np.array_equal(pauli_string("X."), kron(SIGMA_X, SIGMA_I))
    assert np.array_equal(pauli_string("XI"), pauli_string("X."))


def test_pauli_string_rejects_bad_label():
    with pytest.raises(InvalidParameterError):
        pauli_string("XQ")


def test_pauli_error_set_rejects_large_weight():
    with pytest.raises(InvalidParameterError):
        pauli_error_set(2, 3)


def test_pauli_error_set_dimension_cap():
    with pytest.raises(CapExceededError):
        pauli_error_set(4, 1, Limits(max_dim=8))


def test_random_error_set_traceless():
    errors = random_error_set(4, 3, 7)
    assert all(abs(np.trace(e)) < 1e-12 for e in errors)


def test_random_error_set_deterministic():
    a = random_error_set(4, 3, 7)
    b = random_error_set(4, 3, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert a.labels == ("random#7.0", "random#7.1", "random#7.2")


def test_random_error_set_hermitian_and_normalized():
    for e in random_error_set(8, 5, 1):
        assert np.max(np.abs(e - e.conj().T)) < 1e-14
        assert np.linalg.norm(e) == pytest.approx(1.0)


def test_error_count_formula():
    assert error_count(7, 2, 1) == 21
    assert error_count(2, 2, 2) == 15
    for n in range(1, 11):
        assert error_count(n, 2, 1) == 3 * n


def test_error_count_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        error_count(3, 2, 4)


def test_hamming_feasible_published_codes():
    for n, k, m in [(7, 2, 21), (9, 4, 27)]:
        check = hamming_feasible(n, k, m)
        assert check.feasible
        assert check.slack >= 0
        assert check.slack == pytest.approx(1 - k / n - math.log2(m) / n)


def test_hamming_infeasible():
    assert not hamming_feasible(3, 2, 6).feasible


def test_error_set_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        ErrorSet(n_qubits=1, dim=2, generators=(np.array([[0, 1], [0, 0]], dtype=complex),), labels=("bad",))


def test_error_set_rejects_trace():
    with pytest.raises(InvalidParameterError):
        ErrorSet(n_qubits=1, dim=2, generators=(np.eye(2, dtype=complex),), labels=("I",))


def test_from_generators_removes_trace():
    errors = ErrorSet.from_generators([np.diag([2.0, 0.0])])
    assert np.allclose(errors.generators[0], np.diag([1.0, -1.0]))
    assert errors.n_qubits == 1


def test_subset_keeps_requested_order():
    errors = pauli_error_set(2, 1).subset([".Z", "X."])
    assert errors.labels == (".Z", "X.")
    assert np.array_equal(errors.generators[1], pauli_string("X."))


def test_subset_unknown_label():
    with pytest.raises(InvalidParameterError):
        pauli_error_set(2, 1).subset(["ZZ"])


@pytest.mark.parametrize("n,t", [(n, t) for n in range(1, 7) for t in range(1, min(2, n) + 1)])
def test_pauli_error_set_size_matches_error_count(n, t):
    assert pauli_error_set(n, t).M == error_count(n, 2, t)


@pytest.mark.parametrize(
    "a,b,commute",
    [
        ("X", "Z", False),
        ("X", "X", True),
        ("XZ", "ZX", True),
        ("X.", "Z.", False),
        ("X.", ".Z", True),
        ("XYZ", "ZZZ", True),
        ("XYZ", "Z.Z", False),
        ("XX.", "ZZ.", True),
        ("Y.Y", "X.X", True),
    ],
)
def test_pauli_strings_commute_or_anticommute(a, b, commute):
    p, q = pauli_string(a), pauli_string(b)
    sign = 1 if commute else -1
    assert np.allclose(p @ q, sign * q @ p)


def test_pauli_labels_mark_identity_with_dot():
    labels = pauli_error_set(3, 2).labels
    assert "X.Z" in labels and "..Y" in labels
    assert not any("I" in label for label in labels)
    assert np.array_equal(pauli_string("X.Z"), pauli_string("XIZ"))
