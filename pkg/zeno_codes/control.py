"""Non-holonomic control: two fixed Hamiltonians, alternating durations.

The encoding is realized as

    C = exp(−i t_M' H_·) ··· exp(−i t_2 H_2) exp(−i t_1 H_1)

and the inverse by replaying the timings backwards with both Hamiltonians
negated (reversed B_x and detuning).
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .code_search import (
    Encoding,
    Trace,
    code_columns,
    gamma_step,
    gamma_update,
    projected_errors,
    split_dimension,
    weak_residual,
)
from .config import Limits, SynthSettings
from .error_model import ErrorSet
from .exceptions import (
    CapExceededError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    InvalidParameterError,
    NotConvergedError,
    NotHermitianError,
    ZeroDetuningError,
)
from .linalg import (
    PAULIS,
    ComplexMatrix,
    damped_lstsq,
    dagger,
    embed_operator,
    evolve_from_eig,
    herm_eig,
    lstsq_rank,
)

logger = logging.getLogger(__name__)

PAIR_ATOL = 1e-12
AXES = ("X", "Y", "Z")
PAIR_KEYS = ("n", "b_x", "mu", "b_r", "mu2", "delta_omega")


# ==============================================================================
# HAMILTONIANS
# ==============================================================================

def _check_register(n: int, limits: Optional[Limits]) -> None:
    limits = limits or Limits()
    if n < 1:
        raise InvalidParameterError(f"Need at least one qubit, got n={n}")
    if 2 ** n > limits.max_dim:
        raise CapExceededError(f"2^{n} exceeds configured dimension limit {limits.max_dim}")


def build_h1(n: int, b_x: float, mu: Sequence[float], limits: Optional[Limits] = None) -> ComplexMatrix:
    """Magneto-dipole term Σ_j B_x μ_j σ_x^(j)."""
    _check_register(n, limits)
    if len(mu) != n:
        raise InvalidParameterError(f"Expected {n} gyromagnetic ratios, got {len(mu)}")
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for j, mu_j in enumerate(mu):
        h += b_x * mu_j * embed_operator(PAULIS["X"], j, n)
    return h


def build_h2(
    n: int,
    b_r: Sequence[float],
    mu2: np.ndarray,
    delta_omega: float,
    limits: Optional[Limits] = None,
) -> ComplexMatrix:
    """Raman coupling Σ_{i<j} Σ_{a,b} δω⁻¹ μ²_ij B^R_a B^R_b σ_a^(i) σ_b^(j)."""
    _check_register(n, limits)
    if delta_omega == 0:
        raise ZeroDetuningError("Raman detuning δω must be non-zero")
    mu2 = np.asarray(mu2, dtype=float)
    if mu2.shape != (n, n):
        raise InvalidParameterError(f"mu2 must be {n}x{n}, got {mu2.shape}")
    if len(b_r) != 3:
        raise InvalidParameterError(f"B^R must have 3 components, got {len(b_r)}")

    site_ops = [[embed_operator(PAULIS[a], j, n) for a in AXES] for j in range(n)]
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            if mu2[i, j] == 0:
                continue
            for a, b_a in enumerate(b_r):
                for b, b_b in enumerate(b_r):
                    coeff = mu2[i, j] * b_a * b_b / delta_omega
                    if coeff:
                        h += coeff * (site_ops[i][a] @ site_ops[j][b])
    return h


@dataclass(frozen=True, eq=False)
class ControlPair:
    """The two control Hamiltonians and the parameters they were built from."""
    h1: ComplexMatrix
    h2: ComplexMatrix
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.h1.shape != self.h2.shape or self.h1.shape[0] != self.h1.shape[1]:
            raise DimensionMismatchError(
                f"Control Hamiltonians have shapes {self.h1.shape} and {self.h2.shape}"
            )
        for name, h in (("h1", self.h1), ("h2", self.h2)):
            if np.max(np.abs(h - dagger(h))) > PAIR_ATOL:
                raise NotHermitianError(f"Control Hamiltonian {name} is not Hermitian")
        if self.params:
            self._check_params()

    def _check_params(self) -> None:
        """H1 and H2 must be what build_h1 / build_h2 give for ``params``."""
        missing = [key for key in PAIR_KEYS if key not in self.params]
        if missing:
            raise InvalidParameterError(f"Control pair parameters lack {missing}")
        p = self.params
        limits = Limits(max_dim=max(self.h1.shape[0], 1))
        rebuilt = (
            build_h1(p["n"], p["b_x"], p["mu"], limits),
            build_h2(p["n"], p["b_r"], np.asarray(p["mu2"], dtype=float), p["delta_omega"], limits),
        )
        for name, h, expected in (("h1", self.h1, rebuilt[0]), ("h2", self.h2, rebuilt[1])):
            if h.shape != expected.shape or np.max(np.abs(h - expected)) > PAIR_ATOL:
                raise InvalidParameterError(f"Control Hamiltonian {name} does not match its parameters")

    @classmethod
    def from_physical(
        cls,
        n: int,
        b_x: float,
        mu: Sequence[float],
        b_r: Sequence[float],
        mu2: np.ndarray,
        delta_omega: float,
        limits: Optional[Limits] = None,
    ) -> "ControlPair":
        mu2 = np.asarray(mu2, dtype=float)
        params = {
            "n": n,
            "b_x": float(b_x),
            "mu": [float(m) for m in mu],
            "b_r": [float(b) for b in b_r],
            "mu2": mu2.tolist(),
            "delta_omega": float(delta_omega),
        }
        return cls(
            h1=build_h1(n, b_x, mu, limits),
            h2=build_h2(n, b_r, mu2, delta_omega, limits),
            params=params,
        )

    @property
    def dim(self) -> int:
        return self.h1.shape[0]

    def hamiltonian(self, tag: int) -> ComplexMatrix:
        return self.h1 if tag == 1 else self.h2

    @cached_property
    def _spectra(self) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
        return herm_eig(self.h1), herm_eig(self.h2)

    def propagator(self, tag: int, t: float, sign: int = 1) -> ComplexMatrix:
        """exp(−i·sign·t·H_tag) from the cached eigendecomposition."""
        eigenvalues, eigenvectors = self._spectra[tag - 1]
        return evolve_from_eig(sign * eigenvalues, eigenvectors, t)

    @cached_property
    def norms(self) -> Tuple[float, float]:
        """Spectral norms ‖H_1‖, ‖H_2‖."""
        (e1, _), (e2, _) = self._spectra
        return float(np.max(np.abs(e1))), float(np.max(np.abs(e2)))


def default_control_pair(n: int, seed: int = 0, limits: Optional[Limits] = None) -> ControlPair:
    """B_x = 1, BR = (1, 1, 0), δω = 10, μ_j and μ²_ij seeded uniform in [0.5, 1.5]."""
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.5, 1.5, n)
    upper = rng.uniform(0.5, 1.5, (n, n))
    mu2 = np.triu(upper, 1)
    mu2 = mu2 + mu2.T
    return ControlPair.from_physical(n, 1.0, mu, (1.0, 1.0, 0.0), mu2, 10.0, limits)


# ==============================================================================
# TIMING SEQUENCES
# ==============================================================================

@dataclass(eq=False)
class TimingSequence:
    """Durations t_1..t_M' applied right to left, alternating between H_1 and H_2.

    ``start_tag`` is the Hamiltonian used by t_1; ``sign`` = −1 negates both
    Hamiltonians.
    """
    timings: np.ndarray
    sign: int = 1
    start_tag: int = 1
    seed: Optional[int] = None
    residual: float = float("nan")
    trace: Trace = field(default_factory=list)
    beta_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.timings = np.asarray(self.timings, dtype=float).ravel()
        if self.sign not in (1, -1):
            raise InvalidParameterError(f"sign must be +1 or -1, got {self.sign}")
        if self.start_tag not in (1, 2):
            raise InvalidParameterError(f"start_tag must be 1 or 2, got {self.start_tag}")
        if np.any(self.timings <= 0):
            raise InvalidParameterError("Timings must be strictly positive")

    def __len__(self) -> int:
        return len(self.timings)

    def tags(self) -> np.ndarray:
        """Hamiltonian index (1 or 2) of every slot."""
        other = 3 - self.start_tag
        return np.where(np.arange(len(self)) % 2 == 0, self.start_tag, other)


def inverse_sequence(seq: TimingSequence) -> TimingSequence:
    """Reversed timings with both Hamiltonians negated; every timing keeps its Hamiltonian."""
    start = int(seq.tags()[-1]) if len(seq) else seq.start_tag
    return TimingSequence(
        timings=seq.timings[::-1].copy(),
        sign=-seq.sign,
        start_tag=start,
        seed=seq.seed,
        residual=seq.residual,
    )


def _factors(seq: TimingSequence, pair: ControlPair) -> List[ComplexMatrix]:
    return [pair.propagator(int(tag), t, seq.sign) for t, tag in zip(seq.timings, seq.tags())]


def sequence_unitary(seq: TimingSequence, pair: ControlPair) -> ComplexMatrix:
    c = np.eye(pair.dim, dtype=complex)
    for factor in _factors(seq, pair):
        c = factor @ c
    return c


def sequence_gradients(seq: TimingSequence, pair: ControlPair) -> List[ComplexMatrix]:
    """∂C/∂t_l for every slot, from one prefix and one suffix sweep."""
    factors = _factors(seq, pair)
    tags = seq.tags()
    eye = np.eye(pair.dim, dtype=complex)

    prefixes = []
    current = eye
    for factor in factors:
        prefixes.append(current)
        current = factor @ current

    gradients: List[ComplexMatrix] = [None] * len(factors)
    suffix = eye
    for l in range(len(factors) - 1, -1, -1):
        generator = -1j * seq.sign * pair.hamiltonian(int(tags[l]))
        gradients[l] = suffix @ generator @ factors[l] @ prefixes[l]
        suffix = suffix @ factors[l]
    return gradients


def sequence_gradient(seq: TimingSequence, pair: ControlPair, l: int) -> ComplexMatrix:
    """∂C/∂t_l for the 1-based slot l."""
    if not 1 <= l <= len(seq):
        raise IndexOutOfRangeError(f"Slot {l} outside 1..{len(seq)}")
    return sequence_gradients(seq, pair)[l - 1]


def _column_jacobian(
    seq: TimingSequence,
    pair: ControlPair,
    columns: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """V = C[:, columns] and ∂V/∂t_l for all l, shape (M', dim, N)."""
    factors = _factors(seq, pair)
    tags = seq.tags()
    dim = pair.dim

    prefix_columns = []
    current = np.eye(dim, dtype=complex)[:, columns]
    for factor in factors:
        prefix_columns.append(current)
        current = factor @ current
    V = current

    dV = np.empty((len(factors), dim, len(columns)), dtype=complex)
    suffix = np.eye(dim, dtype=complex)
    for l in range(len(factors) - 1, -1, -1):
        generator = -1j * seq.sign * pair.hamiltonian(int(tags[l]))
        dV[l] = suffix @ (generator @ (factors[l] @ prefix_columns[l]))
        suffix = suffix @ factors[l]
    return V, dV


def _hermitian_to_real(blocks: np.ndarray) -> np.ndarray:
    """Independent real components of Hermitian N×N blocks: N² reals per block.

    Accepts (..., N, N) and flattens the trailing block axes.
    """
    N = blocks.shape[-1]
    diag = np.arange(N)
    iu = np.triu_indices(N, 1)
    parts = [
        blocks[..., diag, diag].real,
        blocks[..., iu[0], iu[1]].real,
        blocks[..., iu[0], iu[1]].imag,
    ]
    stacked = np.concatenate(parts, axis=-1)
    return stacked.reshape(stacked.shape[:-2] + (-1,)) if stacked.ndim > 2 else stacked.ravel()


def _increment_jacobian(V: np.ndarray, dV: np.ndarray, errors: ErrorSet) -> np.ndarray:
    """Real Jacobian of all V†E_mV with respect to the timings, shape (M·N², M')."""
    EV = np.array([e @ V for e in errors])
    one_sided = np.einsum("mbi,lbj->lmij", EV.conj(), dV)
    increments = one_sided + np.conj(np.swapaxes(one_sided, -1, -2))
    return _hermitian_to_real(increments).T


TARGET_MODES = ("residual", "linearized", "gamma")


def target_increments(V: np.ndarray, errors: ErrorSet, mode: str = "residual") -> np.ndarray:
    """Desired change of every V†E_mV for one timing update, shape (M, N, N).

    ``residual`` asks for −V†E_mV, the Gauss-Newton target. ``linearized`` is
    the first-order change of V†E_mV under the γ update V → V + ΔV of the code
    search. ``gamma`` combines the γ blocks directly: V†E_mVγ_m + γ_m†V†E_mV.
    """
    if mode not in TARGET_MODES:
        raise InvalidParameterError(f"Unknown target mode '{mode}', expected one of {TARGET_MODES}")
    projected = projected_errors(V, errors)
    if mode == "residual":
        return -projected
    gamma = gamma_step(V, errors)
    if mode == "gamma":
        one_sided = projected @ gamma.blocks
    else:
        EV = np.array([e @ V for e in errors])
        one_sided = np.einsum("mbi,bj->mij", EV.conj(), gamma_update(V, errors, gamma))
    return one_sided + np.conj(np.swapaxes(one_sided, -1, -2))


def _merit(V: np.ndarray, errors: ErrorSet) -> float:
    """Squared norm of the real components the timing system works on."""
    return float(np.sum(_hermitian_to_real(projected_errors(V, errors)) ** 2))


def _initial_timings(
    count: int,
    start_slot: int,
    pair: ControlPair,
    rng: np.random.Generator,
    settings: SynthSettings,
) -> Tuple[np.ndarray, np.ndarray]:
    """Random timings so every slot acquires an action ‖H‖·t inside the init window."""
    norms = np.array(pair.norms)
    slots = np.arange(start_slot, start_slot + count)
    scale = 1.0 / norms[slots % 2]
    lo, hi = settings.init_window
    return rng.uniform(lo, hi, count) * scale, scale


def _timing_step(
    J: np.ndarray,
    rhs: np.ndarray,
    scale: np.ndarray,
    beta: float,
    damping: float,
    max_step: float,
) -> np.ndarray:
    """β times the damped solution in action units, capped at ``max_step`` per slot."""
    step = beta * damped_lstsq(J * scale, rhs, damping)
    largest = np.max(np.abs(step)) if step.size else 0.0
    if largest > max_step:
        step *= max_step / largest
    return step * scale


def synthesize(
    errors: ErrorSet,
    pair: ControlPair,
    k: int,
    m_prime: int,
    seed: int,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    beta0: Optional[float] = None,
    settings: Optional[SynthSettings] = None,
) -> Tuple[TimingSequence, Encoding]:
    """Timings whose product C realizes an encoding with vanishing projected errors.

    Each iteration linearizes every V†E_mV in the timings and solves the real
    system J·δt = δ̂ (see ``target_increments``) with Levenberg-Marquardt
    damping, in units of acquired action. β scales the step: a step that
    would increase Σ‖V†E_mV‖² is rejected, β halves and the damping grows;
    an accepted step grows β by ``beta_grow`` and relaxes the damping. No
    slot changes its action by more than ``settings.max_step`` per step.
    """
    settings = settings or SynthSettings()
    tol = settings.tol if tol is None else tol
    max_iter = settings.max_iter if max_iter is None else max_iter
    beta = settings.beta0 if beta0 is None else beta0
    if pair.dim != errors.dim:
        raise DimensionMismatchError(
            f"Control pair acts on dimension {pair.dim}, errors on {errors.dim}"
        )
    if m_prime < 1:
        raise InvalidParameterError(f"m_prime must be positive, got {m_prime}")
    if settings.target not in TARGET_MODES:
        raise InvalidParameterError(
            f"Unknown target mode '{settings.target}', expected one of {TARGET_MODES}"
        )
    N, A = split_dimension(errors, k)
    columns = code_columns(N, A)
    n = errors.n_qubits
    M = errors.M
    if M and m_prime < M * N * N:
        logger.warning(
            f"m_prime={m_prime} is below M·N²={M * N * N}; exact synthesis may be impossible"
        )

    rng = np.random.default_rng(seed)
    timings, scale = _initial_timings(m_prime, 0, pair, rng, settings)
    floors = settings.clamp_floor * scale
    seq = TimingSequence(timings=timings, seed=seed)
    logger.info(
        f"Synthesizing timings: dim={errors.dim}, N={N}, M={M}, M'={m_prime}, seed={seed}"
    )

    if M == 0:
        C = sequence_unitary(seq, pair)
        seq.residual = 0.0
        seq.trace = [(0, 0.0)]
        seq.beta_history = [beta]
        return seq, Encoding(n=n, k=k, isometry=C[:, columns], residual=0.0,
                             trace=[(0, 0.0)], seed=seed, unitary=C)

    V, dV = _column_jacobian(seq, pair, columns)
    res = weak_residual(V, errors)
    merit = _merit(V, errors)
    damping = settings.damping
    trace: Trace = [(0, res)]
    betas = [beta]
    system = None
    extra = 0
    warned_singular = False

    for it in range(1, max_iter + 1):
        if res <= tol:
            break
        if system is None:
            J = _increment_jacobian(V, dV, errors)
            rank = lstsq_rank(J)
            if rank < min(J.shape):
                log = logger.debug if warned_singular else logger.warning
                log(f"Timing system singular at iteration {it} (rank {rank} of {min(J.shape)})")
                warned_singular = True
                if settings.grow_on_singular and extra < settings.max_extra_timings:
                    new, new_scale = _initial_timings(2, len(seq), pair, rng, settings)
                    seq = replace(seq, timings=np.concatenate([seq.timings, new]))
                    scale = np.concatenate([scale, new_scale])
                    floors = settings.clamp_floor * scale
                    extra += 2
                    logger.info(f"Appended two timings (M'={len(seq)})")
                    V, dV = _column_jacobian(seq, pair, columns)
                    res = weak_residual(V, errors)
                    merit = _merit(V, errors)
                    continue
            system = (J, _hermitian_to_real(target_increments(V, errors, settings.target)))

        step = _timing_step(*system, scale, beta, damping, settings.max_step)
        trial = replace(seq, timings=np.maximum(seq.timings + step, floors))
        V_trial, dV_trial = _column_jacobian(trial, pair, columns)
        merit_trial = _merit(V_trial, errors)
        if merit_trial < merit:
            seq, V, dV, merit = trial, V_trial, dV_trial, merit_trial
            res = weak_residual(V, errors)
            beta = min(beta * settings.beta_grow, settings.beta_max)
            damping = max(damping * settings.damping_shrink, settings.damping_min)
            system = None
        else:
            beta *= settings.beta_shrink
            damping = min(damping * settings.damping_grow, settings.damping_max)
        trace.append((it, res))
        betas.append(beta)
        logger.debug(f"synth iter {it}: residual {res:.3e}, beta {beta:.3g}, damping {damping:.1e}")
        if beta < settings.beta_min:
            logger.warning(f"Step scale fell below {settings.beta_min:g}; stopping at residual {res:.3e}")
            break

    C = sequence_unitary(seq, pair)
    seq.residual = res
    seq.trace = trace
    seq.beta_history = betas
    encoding = Encoding(n=n, k=k, isometry=C[:, columns], residual=res, trace=trace,
                        seed=seed, converged=res <= tol, unitary=C)
    if res > tol:
        raise NotConvergedError(trace[-1][0], res, best=(seq, encoding))
    logger.info(f"Synthesis converged: residual {res:.3e} with M'={len(seq)}")
    return seq, encoding


def synthesize_with_restarts(
    errors: ErrorSet,
    pair: ControlPair,
    k: int,
    m_prime: int,
    seed: int,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    beta0: Optional[float] = None,
    settings: Optional[SynthSettings] = None,
) -> Tuple[TimingSequence, Encoding]:
    """synthesize retried with seed+1, seed+2, … up to ``settings.restarts`` extra attempts."""
    settings = settings or SynthSettings()
    best: Optional[Tuple[TimingSequence, Encoding]] = None
    last_error: Optional[NotConvergedError] = None
    for attempt in range(settings.restarts + 1):
        try:
            return synthesize(errors, pair, k, m_prime, seed + attempt, tol, max_iter, beta0, settings)
        except NotConvergedError as e:
            logger.warning(f"Synthesis seed {seed + attempt} did not converge (residual {e.residual:.3e})")
            last_error = e
            if best is None or e.residual < best[0].residual:
                best = e.best
    raise NotConvergedError(last_error.iterations, best[0].residual, best=best)


# ==============================================================================
# DIAGNOSTICS
# ==============================================================================

@dataclass(frozen=True, eq=False)
class ActionReport:
    """Acquired action ‖H_tag‖·t_l per slot and whether it counts as big."""
    actions: np.ndarray
    big: np.ndarray

    @property
    def all_big(self) -> bool:
        return bool(np.all(self.big))


def action_report(
    seq: TimingSequence,
    pair: ControlPair,
    settings: Optional[SynthSettings] = None,
) -> ActionReport:
    settings = settings or SynthSettings()
    norms = np.array(pair.norms)
    actions = norms[seq.tags() - 1] * seq.timings
    return ActionReport(actions=actions, big=actions >= settings.big_action)


def lie_algebra_dimension(
    hamiltonians: Sequence[np.ndarray],
    depth: int = 6,
    tol: float = 1e-9,
) -> int:
    """Real dimension of the Lie algebra generated by {iH} via nested commutators."""
    basis: List[np.ndarray] = []

    def add(x: np.ndarray) -> bool:
        v = np.concatenate([x.real.ravel(), x.imag.ravel()])
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return False
        v = v / norm
        for _ in range(2):
            for b in basis:
                v = v - np.dot(b, v) * b
        remainder = np.linalg.norm(v)
        if remainder <= tol:
            return False
        basis.append(v / remainder)
        return True

    generators = [1j * np.asarray(h, dtype=complex) for h in hamiltonians]
    frontier = [g for g in generators if add(g)]
    for _ in range(depth):
        fresh = []
        for x in frontier:
            for g in generators:
                bracket = x @ g - g @ x
                scale = np.linalg.norm(bracket)
                if scale and add(bracket):
                    fresh.append(bracket / scale)
        if not fresh:
            break
        frontier = fresh
    return len(basis)
