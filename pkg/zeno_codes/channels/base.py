from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..error_model import ErrorSet
from ..exceptions import DimensionMismatchError
from ..linalg import ComplexMatrix


@dataclass
class ResetOutcome:
    """Information-register state after one ancilla reset."""
    state: np.ndarray
    fidelity: float
    leakage: float


class BaseNoiseStrategy(ABC):
    """Abstract base class for per-period error propagators."""

    @abstractmethod
    def build(self, errors: ErrorSet, actions: np.ndarray) -> ComplexMatrix:
        """
        Builds the propagator of one Zeno period.

        Args:
            errors: The error generators E_m.
            actions: Accumulated action φ_m of every generator over the period.

        Returns:
            A dim×dim matrix acting on the full register.
        """
        pass

    @staticmethod
    def _check_actions(errors: ErrorSet, actions: np.ndarray) -> np.ndarray:
        actions = np.asarray(actions, dtype=float).ravel()
        if actions.shape[0] != errors.M:
            raise DimensionMismatchError(
                f"Got {actions.shape[0]} actions for {errors.M} error generators"
            )
        return actions


class BaseResetStrategy(ABC):
    """Abstract base class for ancilla reset at the end of a Zeno period."""

    @abstractmethod
    def prepare(self, s0: np.ndarray) -> np.ndarray:
        """Initial information-register state in the representation this reset works on."""
        pass

    @abstractmethod
    def apply(self, state: np.ndarray, cycle: np.ndarray, s0: np.ndarray) -> ResetOutcome:
        """
        Runs one cycle and resets the ancilla.

        Args:
            state: Current information-register state (from prepare or a previous apply).
            cycle: Columns of decode·noise·encode on the code inputs, shape (N·A, N).
            s0: Initial information state the fidelity is measured against.

        Returns:
            ResetOutcome with the new state, its fidelity and the leakage of this cycle.
        """
        pass
