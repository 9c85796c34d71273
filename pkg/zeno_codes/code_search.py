"""Search for code subspaces on which every error generator has vanishing matrix elements.

The central object is the isometry V = C|α̃⟩ whose N columns span the code
space. The search drives all projected errors V†E_mV to zero by repeating a
least-squares step over coefficients γ_m:

    minimize ‖V + Σ_m E_m V γ_m‖,   then   V ← V + ½ Σ_m E_m V γ_m

The normal equations of that problem make the half step a Newton step for
V†E_mV → 0. A single protected vector is the N = 1 case.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from .config import SearchSettings
from .error_model import ErrorSet, hamming_feasible
from .exceptions import DimensionMismatchError, InvalidParameterError, NotConvergedError
from .linalg import ComplexMatrix, StateVector, dagger, lstsq, orthonormalize

logger = logging.getLogger(__name__)

Trace = List[Tuple[int, float]]


@dataclass(eq=False)
class Encoding:
    """Code isometry (NA×N) plus how it was found.

    Column s is the encoded image of |s⟩⊗|α̃⟩, i.e. column s·A of the full
    encoding unitary. ``unitary`` is kept when the full transformation is
    known (for example when realized by a control sequence).
    """
    n: int
    k: int
    isometry: ComplexMatrix
    residual: float
    trace: Trace = field(default_factory=list)
    seed: Optional[int] = None
    converged: bool = True
    unitary: Optional[ComplexMatrix] = None

    @property
    def N(self) -> int:
        return self.isometry.shape[1]

    @property
    def A(self) -> int:
        return self.isometry.shape[0] // self.N

    @property
    def dim(self) -> int:
        return self.isometry.shape[0]

    @property
    def columns(self) -> np.ndarray:
        return code_columns(self.N, self.A)


@dataclass(eq=False)
class GammaCoefficients:
    """γ̂_m blocks (M×N×N) and the orthonormality correction γ̂₀ (N×N)."""
    blocks: np.ndarray
    gram: np.ndarray

    @property
    def scalars(self) -> np.ndarray:
        """γ_m in single-vector mode."""
        return self.blocks[:, 0, 0]


def code_columns(N: int, A: int) -> np.ndarray:
    """Indices s·A of the states |s⟩⊗|α̃⟩ with α̃ = 0."""
    return np.arange(N) * A


def _as_columns(v: Union[Encoding, np.ndarray]) -> ComplexMatrix:
    if isinstance(v, Encoding):
        return v.isometry
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        return v[:, None]
    return v


def _require_dim(V: np.ndarray, dim: int) -> None:
    if V.shape[0] != dim:
        raise DimensionMismatchError(
            f"Code vectors have length {V.shape[0]} but operators have dimension {dim}"
        )


def projected_errors(v: Union[Encoding, np.ndarray], errors: ErrorSet) -> np.ndarray:
    """Stack of V†E_mV, shape (M, N, N)."""
    V = _as_columns(v)
    _require_dim(V, errors.dim)
    Vh = dagger(V)
    return np.array([Vh @ e @ V for e in errors]).reshape(errors.M, V.shape[1], V.shape[1])


def projected_error(v: Union[Encoding, np.ndarray], e: np.ndarray) -> ComplexMatrix:
    """V†·e·V, the error restricted to the code space."""
    V = _as_columns(v)
    _require_dim(V, e.shape[0])
    return dagger(V) @ e @ V


def weak_residual(v: Union[Encoding, np.ndarray], errors: ErrorSet) -> float:
    """max over m, l, s of |⟨ν_l|E_m|ν_s⟩|."""
    V = _as_columns(v)
    _require_dim(V, errors.dim)
    if errors.M == 0:
        return 0.0
    return float(np.max(np.abs(projected_errors(V, errors))))


def knill_residual(v: Union[Encoding, np.ndarray], errors: ErrorSet) -> float:
    """Largest deviation of V†E_sE_lV from c_sl·I, with c_sl the block's mean diagonal.

    Zero iff the (Knill-Laflamme form of the) strong condition holds.
    """
    V = _as_columns(v)
    _require_dim(V, errors.dim)
    if errors.M == 0:
        return 0.0
    Vh = dagger(V)
    eye = np.eye(V.shape[1])
    right = [e @ V for e in errors]
    worst = 0.0
    for e_s in errors:
        left = Vh @ e_s
        for r in right:
            block = left @ r
            c = np.mean(np.diag(block))
            worst = max(worst, float(np.max(np.abs(block - c * eye))))
    return worst


def _design_matrix(V: np.ndarray, errors: ErrorSet) -> np.ndarray:
    """B = [E_1V | … | E_MV]; column m·N + i is E_m ν_i."""
    if errors.M == 0:
        return np.zeros((V.shape[0], 0), dtype=complex)
    return np.hstack([e @ V for e in errors])


def gamma_step(x: Union[Encoding, np.ndarray], errors: ErrorSet) -> GammaCoefficients:
    """Least-squares γ for one iteration.

    Columns of γ̂ decouple, so the whole stacked system is one ``lstsq``
    with N right-hand sides. The appended orthonormality block γ̂₀ solves
    V†V γ̂₀ = −½(V†V − I).
    """
    V = _as_columns(x)
    _require_dim(V, errors.dim)
    N = V.shape[1]
    gram_matrix = dagger(V) @ V
    gram = lstsq(gram_matrix, -0.5 * (gram_matrix - np.eye(N)))
    if errors.M == 0:
        return GammaCoefficients(blocks=np.zeros((0, N, N), dtype=complex), gram=gram)
    B = _design_matrix(V, errors)
    solution = lstsq(B, -V)
    return GammaCoefficients(blocks=solution.reshape(errors.M, N, N), gram=gram)


def gamma_update(
    V: np.ndarray,
    errors: ErrorSet,
    gamma: GammaCoefficients,
    step_factor: float = 0.5,
) -> np.ndarray:
    """ΔV = step·Σ E_m V γ̂_m + V γ̂₀ (before re-orthonormalization)."""
    N = V.shape[1]
    delta = V @ gamma.gram
    if errors.M:
        delta = delta + step_factor * (_design_matrix(V, errors) @ gamma.blocks.reshape(errors.M * N, N))
    return delta


def _random_columns(dim: int, N: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, N)) + 1j * rng.standard_normal((dim, N))
    return orthonormalize(z)


def find_code_vector(
    errors: ErrorSet,
    seed: int,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    settings: Optional[SearchSettings] = None,
) -> Tuple[StateVector, Trace]:
    """Unit vector x with ⟨x|E_m|x⟩ = 0 for every generator."""
    settings = settings or SearchSettings()
    tol = settings.tol if tol is None else tol
    max_iter = settings.max_iter if max_iter is None else max_iter
    if errors.M == 0:
        raise InvalidParameterError("find_code_vector needs at least one error generator")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(errors.dim) + 1j * rng.standard_normal(errors.dim)
    x /= np.linalg.norm(x)

    trace: Trace = []
    best_x, best_res = x, np.inf
    for it in range(max_iter + 1):
        res = weak_residual(x, errors)
        trace.append((it, res))
        logger.debug(f"code vector iter {it}: residual {res:.3e}")
        if res < best_res:
            best_x, best_res = x, res
        if res <= tol:
            logger.info(f"Code vector converged in {it} iterations (residual {res:.3e})")
            return x, trace
        if it == max_iter:
            break
        gamma = gamma_step(x, errors)
        x = x + gamma_update(x[:, None], errors, gamma, settings.step_factor)[:, 0]
        x /= np.linalg.norm(x)

    raise NotConvergedError(max_iter, best_res, best=(best_x, trace))


def trivial_embedding(n: int, k: int, dim: Optional[int] = None) -> Encoding:
    """Identity encoding: column s is e_{s·A} (ancilla left in |α̃⟩)."""
    dim = 2 ** n if dim is None else dim
    N = 2 ** k
    A = dim // N
    V = np.zeros((dim, N), dtype=complex)
    V[code_columns(N, A), np.arange(N)] = 1.0
    return Encoding(n=n, k=k, isometry=V, residual=0.0, trace=[(0, 0.0)], unitary=np.eye(dim, dtype=complex))


def split_dimension(errors: ErrorSet, k: int) -> Tuple[int, int]:
    if k < 0:
        raise InvalidParameterError(f"k must be non-negative, got {k}")
    N = 2 ** k
    if errors.dim % N or errors.dim == N:
        raise InvalidParameterError(
            f"Cannot split dimension {errors.dim} into {N} information states and a non-trivial ancilla"
        )
    return N, errors.dim // N


def _warn_on_bound(errors: ErrorSet, k: int, A: int) -> None:
    if errors.n_qubits:
        check = hamming_feasible(errors.n_qubits, k, errors.M)
        if not check.feasible:
            logger.warning(
                f"Hamming bound violated: M={errors.M} > A={A} (slack {check.slack:.3f}); "
                "searching anyway"
            )
    elif errors.M > A:
        logger.warning(f"Hamming bound violated: M={errors.M} > A={A}; searching anyway")


def find_encoding(
    errors: ErrorSet,
    k: int,
    seed: int,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    settings: Optional[SearchSettings] = None,
) -> Encoding:
    """Isometry whose columns satisfy ⟨ν_l|E_m|ν_s⟩ = 0 and ⟨ν_l|ν_s⟩ = δ_ls."""
    settings = settings or SearchSettings()
    tol = settings.tol if tol is None else tol
    max_iter = settings.max_iter if max_iter is None else max_iter
    N, A = split_dimension(errors, k)
    n = errors.n_qubits
    _warn_on_bound(errors, k, A)

    if errors.M == 0:
        logger.info("No error generators: returning the trivial embedding")
        encoding = trivial_embedding(n, k, errors.dim)
        encoding.seed = seed
        return encoding

    logger.info(f"Searching encoding: dim={errors.dim}, N={N}, A={A}, M={errors.M}, seed={seed}")
    rng = np.random.default_rng(seed)
    V = _random_columns(errors.dim, N, rng)

    trace: Trace = []
    best_V, best_res = V, np.inf
    for it in range(max_iter + 1):
        res = weak_residual(V, errors)
        trace.append((it, res))
        logger.debug(f"encoding iter {it}: residual {res:.3e}")
        if res < best_res:
            best_V, best_res = V, res
        if res <= tol:
            logger.info(f"Encoding converged in {it} iterations (residual {res:.3e})")
            return Encoding(n=n, k=k, isometry=V, residual=res, trace=trace, seed=seed)
        if it == max_iter:
            break
        gamma = gamma_step(V, errors)
        V = orthonormalize(V + gamma_update(V, errors, gamma, settings.step_factor))

    best = Encoding(
        n=n, k=k, isometry=best_V, residual=best_res, trace=trace, seed=seed, converged=False
    )
    raise NotConvergedError(max_iter, best_res, best=best)


def find_encoding_with_restarts(
    errors: ErrorSet,
    k: int,
    seed: int,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    settings: Optional[SearchSettings] = None,
) -> Encoding:
    """find_encoding retried with seed+1, seed+2, … up to ``settings.restarts`` extra attempts."""
    settings = settings or SearchSettings()
    best: Optional[Encoding] = None
    last_error: Optional[NotConvergedError] = None
    for attempt in range(settings.restarts + 1):
        try:
            return find_encoding(errors, k, seed + attempt, tol, max_iter, settings)
        except NotConvergedError as e:
            logger.warning(f"Seed {seed + attempt} did not converge (residual {e.residual:.3e})")
            last_error = e
            if best is None or e.residual < best.residual:
                best = e.best
    raise NotConvergedError(last_error.iterations, best.residual, best=best)


def sphere_oracle(
    errors: ErrorSet,
    seed: int,
    max_evals: int = 200000,
) -> Tuple[StateVector, float]:
    """Derivative-free minimization of Σ_m ⟨x|E_m|x⟩² over the unit sphere.

    Used as an independent reference for find_code_vector on small instances.
    """
    dim = errors.dim
    rng = np.random.default_rng(seed)

    def unpack(y: np.ndarray) -> np.ndarray:
        x = y[:dim] + 1j * y[dim:]
        return x / np.linalg.norm(x)

    def objective(y: np.ndarray) -> float:
        x = unpack(y)
        return float(sum(np.real(np.vdot(x, e @ x)) ** 2 for e in errors))

    y0 = rng.standard_normal(2 * dim)
    result = minimize(
        objective,
        y0,
        method="Powell",
        options={"xtol": 1e-12, "ftol": 1e-24, "maxfev": max_evals},
    )
    x = unpack(result.x)
    return x, weak_residual(x, errors)
