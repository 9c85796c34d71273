import logging

import numpy as np

from ..exceptions import ZeroNormStateError
from .base import BaseResetStrategy, ResetOutcome

logger = logging.getLogger(__name__)

# Below this postselection probability the ancilla is taken to have leaked completely.
MIN_SURVIVAL = 1e-15


def _ancilla_blocks(cycle: np.ndarray) -> np.ndarray:
    """Kraus blocks K[:, α, :] of the cycle, one per ancilla outcome α."""
    dim, N = cycle.shape
    return cycle.reshape(N, dim // N, N)


class PostselectReset(BaseResetStrategy):
    """Project the ancilla onto |α̃⟩ and renormalize the information state."""

    def prepare(self, s0: np.ndarray) -> np.ndarray:
        return np.asarray(s0, dtype=complex).copy()

    def apply(self, state: np.ndarray, cycle: np.ndarray, s0: np.ndarray) -> ResetOutcome:
        kept = _ancilla_blocks(cycle)[:, 0, :] @ state
        p = float(np.vdot(kept, kept).real)
        if p < MIN_SURVIVAL:
            raise ZeroNormStateError(f"Postselection probability {p:.3e} is below {MIN_SURVIVAL:g}")
        kept = kept / np.sqrt(p)
        fidelity = float(abs(np.vdot(s0, kept)) ** 2)
        return ResetOutcome(
            state=kept,
            fidelity=min(fidelity, 1.0),
            leakage=float(np.clip(1.0 - p, 0.0, 1.0)),
        )


class ReplaceReset(BaseResetStrategy):
    """Trace out the ancilla and put it back into |α̃⟩ (a channel on the information density matrix)."""

    def prepare(self, s0: np.ndarray) -> np.ndarray:
        s0 = np.asarray(s0, dtype=complex)
        return np.outer(s0, s0.conj())

    def apply(self, state: np.ndarray, cycle: np.ndarray, s0: np.ndarray) -> ResetOutcome:
        K = _ancilla_blocks(cycle)
        rho = np.einsum("iaj,jk,lak->il", K, state, K.conj())
        kept = K[:, 0, :]
        p = float(np.trace(kept @ state @ kept.conj().T).real)
        # First-order noise is not trace preserving.
        trace = float(np.trace(rho).real)
        if trace < MIN_SURVIVAL:
            raise ZeroNormStateError(f"Density matrix trace {trace:.3e} vanished")
        rho = rho / trace
        rho = 0.5 * (rho + rho.conj().T)
        fidelity = float(np.vdot(s0, rho @ s0).real)
        return ResetOutcome(
            state=rho,
            fidelity=float(np.clip(fidelity, 0.0, 1.0)),
            leakage=float(np.clip(1.0 - p / trace, 0.0, 1.0)),
        )
