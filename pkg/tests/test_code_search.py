"""Tests for the weak-condition code search."""
import numpy as np
import pytest

from zeno_codes.code_search import (
    Encoding,
    code_columns,
    find_code_vector,
    find_encoding,
    find_encoding_with_restarts,
    gamma_step,
    knill_residual,
    projected_error,
    projected_errors,
    sphere_oracle,
    split_dimension,
    trivial_embedding,
    weak_residual,
)
from zeno_codes.config import SearchSettings
from zeno_codes.error_model import ErrorSet, pauli_error_set, pauli_string, random_error_set
from zeno_codes.exceptions import InvalidParameterError, NotConvergedError
from zeno_codes.linalg import SIGMA_Z


@pytest.fixture
def sigma_z():
    return ErrorSet.from_generators([SIGMA_Z], labels=["Z"])


def test_weak_residual_balanced_vector(sigma_z):
    assert weak_residual(np.array([1, 1]) / np.sqrt(2), sigma_z) == pytest.approx(0.0, abs=1e-15)


def test_weak_residual_basis_vector(sigma_z):
    assert weak_residual(np.array([1.0, 0.0]), sigma_z) == pytest.approx(1.0)


def test_knill_residual_empty_set():
    assert knill_residual(trivial_embedding(2, 1), ErrorSet.empty(4)) == 0.0


def test_knill_residual_ancilla_error(identity_code, ancilla_x_error):
    assert knill_residual(identity_code, ancilla_x_error) == pytest.approx(0.0, abs=1e-15)


def test_gamma_step_scalar_case(sigma_z):
    gamma = gamma_step(np.array([1.0, 0.0]), sigma_z)
    assert gamma.scalars[0] == pytest.approx(-1.0)


def test_gamma_step_stationary_point(sigma_z):
    gamma = gamma_step(np.array([1, 1]) / np.sqrt(2), sigma_z)
    assert np.allclose(gamma.blocks, 0.0, atol=1e-15)


def test_gamma_step_is_least_squares_optimum(rng):
    errors = random_error_set(6, 3, 11)
    x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    x /= np.linalg.norm(x)
    gamma = gamma_step(x, errors).scalars

    def objective(g):
        return np.linalg.norm(x + sum(gm * (e @ x) for gm, e in zip(g, errors)))

    best = objective(gamma)
    for m in range(3):
        for delta in (1e-6, -1e-6, 1e-6j, -1e-6j):
            shifted = gamma.copy()
            shifted[m] += delta
            assert objective(shifted) >= best - 1e-10


def test_find_code_vector_sigma_z(sigma_z):
    x, trace = find_code_vector(sigma_z, seed=0, tol=1e-13)
    assert weak_residual(x, sigma_z) < 1e-12
    assert abs(abs(x[0]) - abs(x[1])) < 1e-6
    assert trace[-1][1] < 1e-12


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_find_code_vector_ancilla_x(seed):
    errors = ErrorSet.from_generators([pauli_string(".X")])
    x, trace = find_code_vector(errors, seed=seed, tol=1e-11, max_iter=200)
    assert np.real(np.vdot(x, errors.generators[0] @ x)) == pytest.approx(0.0, abs=1e-10)
    assert len(trace) <= 201


def test_find_code_vector_three_z(z_errors_3):
    x, _ = find_code_vector(z_errors_3, seed=0, tol=1e-11)
    assert np.linalg.norm(x) == pytest.approx(1.0)
    for e in z_errors_3:
        assert abs(np.vdot(x, e @ x)) < 1e-10


def test_find_code_vector_is_gamma_fixed_point(z_errors_3):
    """At a converged code vector the least-squares step vanishes."""
    x, _ = find_code_vector(z_errors_3, seed=0, tol=1e-11)
    assert np.max(np.abs(gamma_step(x, z_errors_3).blocks)) < 1e-6


def test_find_code_vector_needs_errors():
    with pytest.raises(InvalidParameterError):
        find_code_vector(ErrorSet.empty(4), seed=0)


def test_find_code_vector_reports_best_iterate(z_errors_3):
    with pytest.raises(NotConvergedError) as excinfo:
        find_code_vector(z_errors_3, seed=0, tol=1e-30, max_iter=0)
    best_x, trace = excinfo.value.best
    assert excinfo.value.residual == pytest.approx(weak_residual(best_x, z_errors_3))
    assert len(trace) == 1


def test_find_encoding_empty_set_is_trivial():
    encoding = find_encoding(ErrorSet.empty(8), k=1, seed=0)
    assert encoding.residual == 0.0
    expected = np.zeros((8, 2))
    expected[[0, 4], [0, 1]] = 1.0
    assert np.array_equal(encoding.isometry, expected)


def test_trivial_embedding_columns(identity_code):
    assert np.array_equal(identity_code.columns, code_columns(2, 2))
    assert np.array_equal(identity_code.isometry[:, 1], np.eye(4)[:, 2])


def test_projected_error_ancilla_x(identity_code):
    assert np.array_equal(projected_error(identity_code, pauli_string(".X")), np.zeros((2, 2)))


def test_projected_error_information_z(identity_code):
    assert np.allclose(projected_error(identity_code, pauli_string("Z.")), np.diag([1.0, -1.0]))


def test_find_encoding_three_z(z_errors_3):
    encoding = find_encoding_with_restarts(z_errors_3, k=1, seed=0, tol=1e-10)
    assert encoding.converged
    V = encoding.isometry
    assert np.allclose(V.conj().T @ V, np.eye(2), atol=1e-10)
    assert weak_residual(encoding, z_errors_3) < 1e-9


def test_find_encoding_five_one(five_one):
    errors, encoding = five_one
    assert encoding.N == 2 and encoding.A == 16
    assert weak_residual(encoding, errors) < 1e-8
    assert np.max(np.abs(projected_errors(encoding, errors))) < 1e-8


def test_weak_five_one_is_not_a_knill_code(five_one):
    """The weak condition holds while E_a†E_b stays far from a multiple of the identity."""
    errors, encoding = five_one
    assert knill_residual(encoding, errors) > 1e-3


def test_find_encoding_not_converged_carries_best(z_errors_3):
    with pytest.raises(NotConvergedError) as excinfo:
        find_encoding(z_errors_3, k=1, seed=0, tol=1e-30, max_iter=2)
    best = excinfo.value.best
    assert isinstance(best, Encoding)
    assert not best.converged
    assert best.residual == excinfo.value.residual


def test_split_dimension_rejects_no_ancilla(z_errors_3):
    with pytest.raises(InvalidParameterError):
        split_dimension(z_errors_3, 3)


def test_oracle_agreement():
    settings = SearchSettings(tol=1e-12, max_iter=5000)
    for seed in (3, 4):
        errors = random_error_set(6, 2, seed)
        x, _ = find_code_vector(errors, seed=seed, settings=settings)
        _, oracle_residual = sphere_oracle(errors, seed=seed)
        found = weak_residual(x, errors)
        assert oracle_residual < 1e-5
        assert found <= 10 * max(oracle_residual, 1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("n,k", [(7, 2), (9, 4)])
def test_published_codes(n, k):
    errors = pauli_error_set(n, 1)
    encoding = find_encoding_with_restarts(errors, k, seed=0, tol=1e-9)
    assert weak_residual(encoding, errors) < 1e-8
    if (n, k) == (7, 2):
        assert knill_residual(encoding, errors) > 1e-3
