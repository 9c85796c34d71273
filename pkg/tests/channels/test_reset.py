"""Tests for the ancilla reset strategies."""
import numpy as np
import pytest

from zeno_codes.channels.reset import PostselectReset, ReplaceReset
from zeno_codes.code_search import code_columns
from zeno_codes.exceptions import ZeroNormStateError
from zeno_codes.linalg import evolve, kron, SIGMA_I, SIGMA_X, SIGMA_Y

COLUMNS = code_columns(2, 2)
S0 = np.array([1.0, 0.0], dtype=complex)


def _cycle(u):
    return u[:, COLUMNS]


def test_postselect_identity_cycle():
    outcome = PostselectReset().apply(S0.copy(), _cycle(np.eye(4, dtype=complex)), S0)
    assert outcome.fidelity == pytest.approx(1.0)
    assert outcome.leakage == pytest.approx(0.0)
    assert np.allclose(outcome.state, S0)


def test_postselect_renormalizes():
    u = evolve(kron(SIGMA_I, SIGMA_X), 0.3)
    outcome = PostselectReset().apply(S0.copy(), _cycle(u), S0)
    assert np.linalg.norm(outcome.state) == pytest.approx(1.0)
    assert outcome.leakage == pytest.approx(np.sin(0.3) ** 2)


def test_postselect_total_leakage():
    u = kron(SIGMA_I, SIGMA_X)
    with pytest.raises(ZeroNormStateError):
        PostselectReset().apply(S0.copy(), _cycle(u), S0)


def test_postselect_information_rotation():
    u = evolve(kron(SIGMA_Y, SIGMA_I), 0.2)
    outcome = PostselectReset().apply(S0.copy(), _cycle(u), S0)
    assert outcome.fidelity == pytest.approx(np.cos(0.2) ** 2)
    assert outcome.leakage == pytest.approx(0.0, abs=1e-15)


def test_replace_keeps_unit_trace():
    strategy = ReplaceReset()
    rho = strategy.prepare(np.array([0.6, 0.8]))
    u = evolve(kron(SIGMA_X, SIGMA_X), 0.4)
    outcome = strategy.apply(rho, _cycle(u), np.array([0.6, 0.8], dtype=complex))
    assert np.trace(outcome.state).real == pytest.approx(1.0)
    assert np.allclose(outcome.state, outcome.state.conj().T)
    assert 0.0 <= outcome.fidelity <= 1.0


def test_replace_mixes_after_entangling_error():
    # X⊗X on |0⟩|0⟩ gives (|00⟩ − i|11⟩)/√2; dropping the ancilla leaves a mixed state.
    strategy = ReplaceReset()
    u = evolve(kron(SIGMA_X, SIGMA_X), np.pi / 4)
    outcome = strategy.apply(strategy.prepare(S0), _cycle(u), S0)
    assert outcome.leakage == pytest.approx(0.5)
    assert outcome.fidelity == pytest.approx(0.5)
    assert np.allclose(outcome.state, np.diag([0.5, 0.5]), atol=1e-12)
