import logging

import numpy as np

from ..error_model import ErrorSet
from ..linalg import ComplexMatrix, evolve
from .base import BaseNoiseStrategy

logger = logging.getLogger(__name__)


def _summed_generator(errors: ErrorSet, actions: np.ndarray) -> ComplexMatrix:
    h = np.zeros((errors.dim, errors.dim), dtype=complex)
    for phi, e in zip(actions, errors):
        if phi:
            h += phi * e
    return h


class FirstOrderNoise(BaseNoiseStrategy):
    """I − iΣφ_mE_m. Not unitary; the defect is second order in the actions."""

    def build(self, errors: ErrorSet, actions: np.ndarray) -> ComplexMatrix:
        actions = self._check_actions(errors, actions)
        return np.eye(errors.dim, dtype=complex) - 1j * _summed_generator(errors, actions)


class ExactNoise(BaseNoiseStrategy):
    """exp(−iΣφ_mE_m): one exponential of the summed generator."""

    def build(self, errors: ErrorSet, actions: np.ndarray) -> ComplexMatrix:
        actions = self._check_actions(errors, actions)
        if not np.any(actions):
            return np.eye(errors.dim, dtype=complex)
        return evolve(_summed_generator(errors, actions), 1.0)


class OrderedProductNoise(BaseNoiseStrategy):
    """Π_m exp(−iφ_mE_m) with E_1 applied first."""

    def build(self, errors: ErrorSet, actions: np.ndarray) -> ComplexMatrix:
        actions = self._check_actions(errors, actions)
        u = np.eye(errors.dim, dtype=complex)
        for phi, e in zip(actions, errors):
            if phi:
                u = evolve(e, phi) @ u
        return u
