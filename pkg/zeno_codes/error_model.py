"""Error-generator sets {E_m} and the counting bounds they are checked against."""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .config import Limits
from .exceptions import (
    CapExceededError,
    DimensionMismatchError,
    InvalidParameterError,
    NotHermitianError,
)
from .linalg import PAULIS, ComplexMatrix, dagger, kron, random_hermitian

logger = logging.getLogger(__name__)

GENERATOR_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ErrorSet:
    """M traceless Hermitian error generators on a common space of dimension ``dim``.

    ``n_qubits`` is 0 for random sets on a dimension that is not a power of two.
    ``weight`` is the maximal Pauli weight t, or 0 for non-Pauli sets.
    """
    n_qubits: int
    dim: int
    generators: Tuple[ComplexMatrix, ...]
    labels: Tuple[str, ...]
    weight: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.generators) != len(self.labels):
            raise DimensionMismatchError(
                f"{len(self.generators)} generators but {len(self.labels)} labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise InvalidParameterError("Error labels must be pairwise distinct")
        for label, e in zip(self.labels, self.generators):
            if e.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"Generator {label} has shape {e.shape}, expected ({self.dim}, {self.dim})"
                )
            if np.max(np.abs(e - dagger(e)), initial=0.0) > GENERATOR_ATOL:
                raise NotHermitianError(f"Generator {label} is not Hermitian")
            if abs(np.trace(e)) > GENERATOR_ATOL:
                raise InvalidParameterError(f"Generator {label} is not traceless")

    @property
    def M(self) -> int:
        return len(self.generators)

    def __len__(self) -> int:
        return self.M

    def __iter__(self):
        return iter(self.generators)

    @classmethod
    def from_generators(
        cls,
        generators: Sequence[np.ndarray],
        labels: Optional[Sequence[str]] = None,
        n_qubits: Optional[int] = None,
        dim: Optional[int] = None,
    ) -> "ErrorSet":
        """Wrap user-supplied Hamiltonians, removing any trace part.

        The identity component of a generator only contributes a global
        phase, so it is subtracted (with a warning) rather than rejected.
        """
        gens = [np.array(g, dtype=complex) for g in generators]
        if dim is None:
            if not gens:
                raise InvalidParameterError("dim is required for an empty error set")
            dim = gens[0].shape[0]
        if n_qubits is None:
            n_qubits = _qubits_for_dim(dim)
        if labels is None:
            labels = [f"E{m}" for m in range(len(gens))]
        repaired = []
        for label, g in zip(labels, gens):
            if g.shape != (dim, dim):
                raise DimensionMismatchError(
                    f"Generator {label} has shape {g.shape}, expected ({dim}, {dim})"
                )
            tr = np.trace(g)
            if abs(tr) > GENERATOR_ATOL:
                logger.warning(f"Generator {label} has trace {tr:.3g}; removing the trace part")
                g = g - (tr / dim) * np.eye(dim)
            repaired.append(g)
        return cls(
            n_qubits=n_qubits,
            dim=dim,
            generators=tuple(repaired),
            labels=tuple(labels),
        )

    def subset(self, labels: Iterable[str]) -> "ErrorSet":
        """Restrict to the named generators, keeping their order as given."""
        index = {label: m for m, label in enumerate(self.labels)}
        wanted = list(labels)
        missing = [label for label in wanted if label not in index]
        if missing:
            raise InvalidParameterError(f"Unknown error labels: {missing}")
        return ErrorSet(
            n_qubits=self.n_qubits,
            dim=self.dim,
            generators=tuple(self.generators[index[label]] for label in wanted),
            labels=tuple(wanted),
            weight=self.weight,
            seed=self.seed,
        )

    @classmethod
    def empty(cls, dim: int) -> "ErrorSet":
        return cls(n_qubits=_qubits_for_dim(dim), dim=dim, generators=(), labels=())


class HammingCheck(NamedTuple):
    feasible: bool
    slack: float


def _qubits_for_dim(dim: int) -> int:
    n = dim.bit_length() - 1
    return n if dim == 2 ** n else 0


def _check_dim(dim: int, limits: Limits) -> None:
    if dim > limits.max_dim:
        raise CapExceededError(
            f"Hilbert-space dimension {dim} exceeds configured limit {limits.max_dim}"
        )


def pauli_string(label: str) -> ComplexMatrix:
    """Operator for a label such as ``"X..Z"`` ('.' or 'I' is identity)."""
    op = np.ones((1, 1), dtype=complex)
    for ch in label:
        key = "I" if ch == "." else ch.upper()
        if key not in PAULIS:
            raise InvalidParameterError(f"Bad Pauli label {label!r}")
        op = kron(op, PAULIS[key])
    return op


def pauli_error_set(n: int, t: int, limits: Optional[Limits] = None) -> ErrorSet:
    """All Pauli strings of weight 1..t on n qubits."""
    limits = limits or Limits()
    if not 1 <= t <= n:
        raise InvalidParameterError(f"Need 1 <= t <= n, got n={n}, t={t}")
    _check_dim(2 ** n, limits)

    labels: List[str] = []
    for weight in range(1, t + 1):
        for sites in itertools.combinations(range(n), weight):
            for letters in itertools.product("XYZ", repeat=weight):
                chars = ["."] * n
                for site, letter in zip(sites, letters):
                    chars[site] = letter
                labels.append("".join(chars))
    generators = tuple(pauli_string(label) for label in labels)
    logger.info(f"Built Pauli error set n={n}, t={t}: M={len(labels)}")
    return ErrorSet(n_qubits=n, dim=2 ** n, generators=generators, labels=tuple(labels), weight=t)


def random_error_set(
    dim: int,
    m: int,
    seed: int,
    limits: Optional[Limits] = None,
) -> ErrorSet:
    """m traceless GUE generators, each scaled to unit Frobenius norm."""
    limits = limits or Limits()
    if dim < 2 or m < 1:
        raise InvalidParameterError(f"Need dim >= 2 and m >= 1, got dim={dim}, m={m}")
    _check_dim(dim, limits)

    rng = np.random.default_rng(seed)
    generators = []
    for _ in range(m):
        h = random_hermitian(dim, rng)
        h = h - (np.trace(h).real / dim) * np.eye(dim)
        generators.append(h / np.linalg.norm(h))
    labels = tuple(f"random#{seed}.{j}" for j in range(m))
    return ErrorSet(
        n_qubits=_qubits_for_dim(dim),
        dim=dim,
        generators=tuple(generators),
        labels=labels,
        seed=seed,
    )


def error_count(n: int, K: int, t: int) -> int:
    """M = Σ_{l=1}^{t} C(n,l)·(K²−1)^l."""
    if K < 2 or not 1 <= t <= n:
        raise InvalidParameterError(f"Need K >= 2 and 1 <= t <= n, got n={n}, K={K}, t={t}")
    return sum(math.comb(n, l) * (K * K - 1) ** l for l in range(1, t + 1))


def hamming_feasible(n: int, k: int, m: int) -> HammingCheck:
    """M ≤ A = 2^(n−k), with slack 1 − k/n − log₂(M)/n."""
    if not 0 <= k < n:
        raise InvalidParameterError(f"Need 0 <= k < n, got n={n}, k={k}")
    feasible = m <= 2 ** (n - k)
    slack = 1.0 - k / n
    if m > 0:
        slack -= math.log2(m) / n
    return HammingCheck(feasible=feasible, slack=slack)
