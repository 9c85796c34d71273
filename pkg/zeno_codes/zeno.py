"""Zeno protection cycle: encode, let the errors act for a period T, decode, reset the ancilla.

Also holds the Haar-random encoding study and the master equation of the
code-space density matrix under the effective Hamiltonian.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .code_search import Encoding, code_columns, projected_errors
from .control import ControlPair, TimingSequence, inverse_sequence, sequence_unitary
from .error_model import ErrorSet
from .exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NotDensityMatrixError,
)
from .linalg import (
    ComplexMatrix,
    StateVector,
    complete_unitary,
    dagger,
    evolve_from_eig,
    haar_unitary,
    herm_eig,
    is_hermitian,
)
from .registry import ChannelRegistry

logger = logging.getLogger(__name__)

STATE_NORM_ATOL = 1e-9
DENSITY_TRACE_ATOL = 1e-10
MIN_STUDY_TRIALS = 10


# ==============================================================================
# FIELDS AND RUN SETTINGS
# ==============================================================================

@dataclass(frozen=True, eq=False)
class FieldTrace:
    """Action φ_{p,m} of error field m accumulated over Zeno period p."""
    M: int
    periods: int
    actions: np.ndarray
    strength: float
    seed: Optional[int] = None

    def __post_init__(self):
        if self.actions.shape != (self.periods, self.M):
            raise DimensionMismatchError(
                f"Actions have shape {self.actions.shape}, expected ({self.periods}, {self.M})"
            )

    @classmethod
    def gaussian(cls, M: int, periods: int, strength: float, seed: int) -> "FieldTrace":
        """i.i.d. normal actions with standard deviation ``strength``."""
        if strength < 0:
            raise InvalidParameterError(f"Field strength must be non-negative, got {strength}")
        if M < 0 or periods < 1:
            raise InvalidParameterError(f"Need M >= 0 and periods >= 1, got M={M}, periods={periods}")
        rng = np.random.default_rng(seed)
        actions = rng.normal(0.0, 1.0, (periods, M)) * strength
        return cls(M=M, periods=periods, actions=actions, strength=float(strength), seed=seed)

    @classmethod
    def for_period(cls, M: int, periods: int, rate: float, T: float, seed: int) -> "FieldTrace":
        """Fields of RMS amplitude ``rate`` held for a period T, i.e. actions of size rate·T."""
        return cls.gaussian(M, periods, rate * T, seed)


@dataclass(frozen=True)
class ZenoConfig:
    T: float
    total_time: float
    noise_mode: str = "exact"
    reset_mode: str = "postselect"

    def __post_init__(self):
        if not 0 < self.T <= self.total_time:
            raise InvalidParameterError(
                f"Need 0 < T <= total_time, got T={self.T}, total_time={self.total_time}"
            )
        ChannelRegistry.get_noise(self.noise_mode)
        ChannelRegistry.get_reset(self.reset_mode)

    @property
    def periods(self) -> int:
        return max(1, int(round(self.total_time / self.T)))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "total_time": self.total_time,
            "noise_mode": self.noise_mode,
            "reset_mode": self.reset_mode,
            "periods": self.periods,
        }


@dataclass(eq=False)
class ZenoReport:
    """Per-cycle bookkeeping of one protection run."""
    fidelity_per_cycle: np.ndarray
    leakage_per_cycle: np.ndarray
    final_infidelity: float
    h_e_norm: float
    config: ZenoConfig
    seed: Optional[int] = None

    @property
    def survival(self) -> float:
        """Probability that every ancilla reset found |α̃⟩."""
        return float(np.prod(1.0 - self.leakage_per_cycle))

    @property
    def cycles(self) -> int:
        return len(self.fidelity_per_cycle)

    def summary(self) -> Dict[str, Any]:
        values: Dict[str, Any] = {
            "final_infidelity": self.final_infidelity,
            "h_e_norm": self.h_e_norm,
            "survival": self.survival,
            "mean_leakage": float(np.mean(self.leakage_per_cycle)) if self.cycles else 0.0,
            "seed": self.seed,
        }
        values.update(self.config.as_dict())
        return values


# ==============================================================================
# BUILDING BLOCKS
# ==============================================================================

def noise_step(errors: ErrorSet, actions: np.ndarray, mode: str = "exact") -> ComplexMatrix:
    """Propagator of one period under the given actions."""
    return ChannelRegistry.get_noise(mode).build(errors, actions)


def effective_hamiltonian(v: Encoding, errors: ErrorSet, f: np.ndarray) -> ComplexMatrix:
    """ĥ_e = Σ_m f_m·V†E_mV on the code space."""
    f = np.asarray(f, dtype=float).ravel()
    if f.shape[0] != errors.M:
        raise DimensionMismatchError(f"Got {f.shape[0]} field values for {errors.M} errors")
    if errors.M == 0:
        return np.zeros((v.N, v.N), dtype=complex)
    return np.einsum("m,mij->ij", f, projected_errors(v, errors))


def _check_density(rho: np.ndarray) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotDensityMatrixError(f"Density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise NotDensityMatrixError("Density matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > DENSITY_TRACE_ATOL:
        raise NotDensityMatrixError(f"Density matrix has trace {trace:.6g}")


def master_step(rho: ComplexMatrix, h_e: ComplexMatrix, dt: float) -> ComplexMatrix:
    """ρ ← UρU† with U = exp(−i·h_e·dt)."""
    return master_evolve(rho, h_e, dt, steps=1)


def master_evolve(rho: ComplexMatrix, h_e: ComplexMatrix, dt: float, steps: int) -> ComplexMatrix:
    """``steps`` consecutive master steps sharing one eigendecomposition of h_e."""
    rho = np.asarray(rho, dtype=complex)
    _check_density(rho)
    h_e = np.asarray(h_e, dtype=complex)
    if h_e.shape != rho.shape:
        raise DimensionMismatchError(f"h_e has shape {h_e.shape}, rho has {rho.shape}")
    if steps < 0:
        raise InvalidParameterError(f"steps must be non-negative, got {steps}")
    eigenvalues, eigenvectors = herm_eig(h_e)
    u = evolve_from_eig(eigenvalues, eigenvectors, dt)
    for _ in range(steps):
        rho = u @ rho @ dagger(u)
    return rho


# ==============================================================================
# PROTECTION RUN
# ==============================================================================

Code = Union[Encoding, TimingSequence]


def _encode_decode(
    code: Code,
    N: int,
    pair: Optional[ControlPair],
) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Full encoding unitary C and the decoding transformation."""
    if isinstance(code, TimingSequence):
        if pair is None:
            raise InvalidParameterError("A control pair is required to run a timing sequence")
        return sequence_unitary(code, pair), sequence_unitary(inverse_sequence(code), pair)
    if code.N != N:
        raise DimensionMismatchError(f"Encoding protects {code.N} states, s0 has dimension {N}")
    C = code.unitary if code.unitary is not None else complete_unitary(code.isometry, code.columns)
    return C, dagger(C)


class ZenoSimulator:
    """
    Runs the encode / noise / decode / reset cycle for a sequence of Zeno periods.
    """

    @staticmethod
    def run(
        s0: StateVector,
        code: Code,
        errors: ErrorSet,
        fields: FieldTrace,
        cfg: ZenoConfig,
        pair: Optional[ControlPair] = None,
    ) -> ZenoReport:
        """
        Simulate one protection run.

        Args:
            s0: Normalized information state of dimension N.
            code: An Encoding, or a TimingSequence realized with ``pair``.
            errors: Error generators acting during every period.
            fields: Per-period actions; at least ``cfg.periods`` rows are needed.
            cfg: Period, total time and the noise / reset strategies.
            pair: Control Hamiltonians, only for a TimingSequence.

        Returns:
            ZenoReport with one fidelity and one leakage per cycle.
        """
        s0 = np.asarray(s0, dtype=complex).ravel()
        N = s0.shape[0]
        norm = np.linalg.norm(s0)
        if abs(norm - 1.0) > STATE_NORM_ATOL:
            raise InvalidParameterError(f"Initial state must be normalized, got norm {norm:.6g}")
        if fields.M != errors.M:
            raise DimensionMismatchError(f"Field trace has {fields.M} fields for {errors.M} errors")
        periods = cfg.periods
        if fields.periods < periods:
            raise DimensionMismatchError(
                f"Field trace covers {fields.periods} periods, run needs {periods}"
            )

        C, C_inv = _encode_decode(code, N, pair)
        dim = C.shape[0]
        if dim != errors.dim:
            raise DimensionMismatchError(f"Encoding acts on dimension {dim}, errors on {errors.dim}")
        if dim % N or dim == N:
            raise DimensionMismatchError(f"Dimension {dim} has no ancilla factor for N={N}")
        columns = code_columns(N, dim // N)
        V = C[:, columns]

        noise = ChannelRegistry.get_noise(cfg.noise_mode)
        reset = ChannelRegistry.get_reset(cfg.reset_mode)
        logger.info(
            f"Zeno run: dim={dim}, N={N}, periods={periods}, T={cfg.T:g}, "
            f"noise={cfg.noise_mode}, reset={cfg.reset_mode}, strength={fields.strength:g}"
        )

        actions = fields.actions[:periods]
        if errors.M:
            projected = projected_errors(V, errors)
            h_e = np.einsum("pm,mij->pij", actions, projected)
            h_e_norm = float(np.max(np.linalg.norm(h_e, axis=(1, 2))))
        else:
            h_e_norm = 0.0

        state = reset.prepare(s0)
        fidelities = np.empty(periods)
        leakages = np.empty(periods)
        for p in range(periods):
            cycle = C_inv @ (noise.build(errors, actions[p]) @ V)
            outcome = reset.apply(state, cycle, s0)
            state = outcome.state
            fidelities[p] = outcome.fidelity
            leakages[p] = outcome.leakage
            logger.debug(f"cycle {p + 1}: fidelity {outcome.fidelity:.12f}, leakage {outcome.leakage:.3e}")

        if cfg.reset_mode == "postselect":
            final = 1.0 - fidelities[-1] * float(np.prod(1.0 - leakages))
        else:
            final = 1.0 - fidelities[-1]
        report = ZenoReport(
            fidelity_per_cycle=fidelities,
            leakage_per_cycle=leakages,
            final_infidelity=float(max(final, 0.0)),
            h_e_norm=h_e_norm,
            config=cfg,
            seed=fields.seed,
        )
        logger.info(f"Zeno run finished: final infidelity {report.final_infidelity:.3e}")
        return report


def zeno_run(
    s0: StateVector,
    code: Code,
    errors: ErrorSet,
    fields: FieldTrace,
    cfg: ZenoConfig,
    pair: Optional[ControlPair] = None,
) -> ZenoReport:
    """Functional alias for ZenoSimulator.run."""
    return ZenoSimulator.run(s0, code, errors, fields, cfg, pair)


# ==============================================================================
# RANDOM ENCODINGS
# ==============================================================================

@dataclass(eq=False)
class RandomEncodingStats:
    """Suppression of projected errors under Haar-random encodings.

    ``gains[t, m]`` is ‖E_m‖²_F / (A·‖V†E_mV‖²_F), which is of order A;
    ``ratios`` divides that by A. ``magnitudes[t, m, i, j]`` holds
    |⟨ν_i|E_m|ν_j⟩| for the histogram artifact.
    """
    n: int
    k: int
    A: int
    seed: int
    gains: np.ndarray
    magnitudes: np.ndarray
    error_norms_sq: np.ndarray
    baseline_ratios: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def trials(self) -> int:
        return self.gains.shape[0]

    @property
    def ratios(self) -> np.ndarray:
        return self.gains / self.A

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def median_ratio(self) -> float:
        return float(np.median(self.ratios))

    @property
    def spread(self) -> float:
        """Interquartile range of the ratios; their variance need not exist for small N."""
        q1, q3 = np.percentile(self.ratios, [25, 75])
        return float(q3 - q1)

    @property
    def mean_gain(self) -> float:
        return float(np.mean(self.gains))

    @property
    def ratio_of_means(self) -> float:
        """⟨‖E‖²⟩ / (A²·⟨‖V†EV‖²⟩) pooled over trials and errors."""
        return float(np.mean(self.error_norms_sq) / (self.A ** 2 * np.mean(self._projected_sq)))

    @property
    def _projected_sq(self) -> np.ndarray:
        return np.sum(self.magnitudes ** 2, axis=(2, 3))

    def summary(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "A": self.A,
            "trials": self.trials,
            "seed": self.seed,
            "mean_ratio": self.mean_ratio,
            "median_ratio": self.median_ratio,
            "spread": self.spread,
            "ratio_of_means": self.ratio_of_means,
            "mean_gain": self.mean_gain,
        }


def _suppression(V: np.ndarray, errors: ErrorSet, full_sq: np.ndarray, A: int) -> Tuple[np.ndarray, np.ndarray]:
    projected = projected_errors(V, errors)
    proj_sq = np.sum(np.abs(projected) ** 2, axis=(1, 2))
    with np.errstate(divide="ignore"):
        gains = full_sq / (A * proj_sq)
    return gains, np.abs(projected)


def random_encoding_gain(
    n: int,
    k: int,
    errors: ErrorSet,
    trials: int,
    seed: int,
    threads: int = 1,
) -> RandomEncodingStats:
    """Projected-error suppression over ``trials`` Haar-random encodings.

    Trial i draws its unitary from the i-th child of SeedSequence(seed), so
    the result does not depend on ``threads``.
    """
    if not 0 <= k < n:
        raise InvalidParameterError(f"Need 0 <= k < n, got n={n}, k={k}")
    if trials < 1:
        raise InvalidParameterError(f"trials must be positive, got {trials}")
    if errors.M == 0:
        raise InvalidParameterError("Random encoding study needs at least one error generator")
    dim = 2 ** n
    if errors.dim != dim:
        raise DimensionMismatchError(f"Errors act on dimension {errors.dim}, n={n} gives {dim}")
    if trials < MIN_STUDY_TRIALS:
        logger.warning(f"Only {trials} trials; suppression statistics will be unreliable")

    N, A = 2 ** k, 2 ** (n - k)
    columns = code_columns(N, A)
    full_sq = np.array([np.linalg.norm(e) ** 2 for e in errors])

    def one_trial(child: np.random.SeedSequence) -> Tuple[np.ndarray, np.ndarray]:
        C = haar_unitary(dim, np.random.default_rng(child))
        return _suppression(C[:, columns], errors, full_sq, A)

    children = np.random.SeedSequence(seed).spawn(trials)
    logger.info(f"Random encoding study: n={n}, k={k}, M={errors.M}, trials={trials}, threads={threads}")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results: List[Tuple[np.ndarray, np.ndarray]] = list(executor.map(one_trial, children))

    baseline, _ = _suppression(np.eye(dim, dtype=complex)[:, columns], errors, full_sq, A)
    stats = RandomEncodingStats(
        n=n,
        k=k,
        A=A,
        seed=seed,
        gains=np.array([r[0] for r in results]),
        magnitudes=np.array([r[1] for r in results]),
        error_norms_sq=full_sq,
        baseline_ratios=baseline / A,
    )
    logger.info(
        f"Mean ratio {stats.mean_ratio:.3f}, median {stats.median_ratio:.3f}, "
        f"ratio of means {stats.ratio_of_means:.3f}"
    )
    return stats
