"""Dense complex linear algebra used by every other module.

Operators are plain ``numpy`` arrays (complex128, row-major). Propagators are
built from Hermitian eigendecompositions so that long products stay unitary
to rounding.
"""
import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as spl
from numpy.typing import NDArray

from .config import HERMITIAN_RTOL, LSTSQ_RCOND
from .exceptions import DimensionMismatchError, InvalidParameterError, NotHermitianError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
StateVector = NDArray[np.complex128]

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_defect(h: np.ndarray) -> float:
    """Relative Frobenius defect ‖h − h†‖ / ‖h‖ (0 for the zero matrix)."""
    norm = np.linalg.norm(h)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(h - dagger(h)) / norm)


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return h.ndim == 2 and h.shape[0] == h.shape[1] and hermiticity_defect(h) <= rtol


def _require_hermitian(h: np.ndarray) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise NotHermitianError(
            f"Matrix is not Hermitian (relative defect {hermiticity_defect(h):.2e})"
        )


def kron(a: np.ndarray, b: np.ndarray) -> ComplexMatrix:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def embed_operator(op: np.ndarray, site: int, n: int) -> ComplexMatrix:
    """Place a single-qubit operator on ``site`` of an n-qubit register.

    Site 0 is the leftmost, most significant factor.
    """
    left = np.eye(2 ** site, dtype=complex)
    right = np.eye(2 ** (n - site - 1), dtype=complex)
    return kron(kron(left, op), right)


def herm_eig(h: np.ndarray) -> Tuple[NDArray[np.float64], ComplexMatrix]:
    """Eigendecomposition h = U diag(λ) U† with ascending real eigenvalues."""
    h = np.asarray(h, dtype=complex)
    _require_hermitian(h)
    # Symmetrize so LAPACK sees an exactly Hermitian input.
    eigenvalues, eigenvectors = spl.eigh(0.5 * (h + dagger(h)))
    return eigenvalues, eigenvectors


def evolve_from_eig(
    eigenvalues: np.ndarray,
    eigenvectors: np.ndarray,
    t: float,
) -> ComplexMatrix:
    """exp(−i·h·t) from a precomputed decomposition of h."""
    phases = np.exp(-1j * eigenvalues * t)
    return (eigenvectors * phases) @ dagger(eigenvectors)


def evolve(h: np.ndarray, t: float) -> ComplexMatrix:
    """Unitary propagator exp(−i·h·t)."""
    h = np.asarray(h, dtype=complex)
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    eigenvalues, eigenvectors = herm_eig(h)
    return evolve_from_eig(eigenvalues, eigenvectors, t)


def lstsq(a: np.ndarray, b: np.ndarray, rcond: float = LSTSQ_RCOND) -> np.ndarray:
    """Minimum-norm least-squares solution of a·x ≈ b.

    Singular values below ``rcond``·σ_max are discarded, so rank-deficient
    systems return the truncated pseudo-inverse solution. ``b`` may be a
    vector or a matrix of right-hand sides.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"lstsq: {a.shape[0]} rows in a but {b.shape[0]} in b"
        )
    out_shape = (a.shape[1],) + b.shape[1:]
    dtype = np.result_type(a, b, np.float64)
    if a.size == 0 or not np.any(a):
        return np.zeros(out_shape, dtype=dtype)
    x, _, rank, _ = spl.lstsq(a, b, cond=rcond, lapack_driver="gelsd")
    if rank < min(a.shape):
        logger.debug(f"lstsq: rank {rank} < {min(a.shape)}, truncated pseudo-inverse used")
    return x


def damped_lstsq(a: np.ndarray, b: np.ndarray, damping: float) -> np.ndarray:
    """Minimizer of ‖a·x − b‖² + λ‖x‖² with λ = damping·σ_max².

    ``damping`` = 0 gives the minimum-norm solution; large values shrink the
    step towards a scaled gradient direction.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"damped_lstsq: {a.shape[0]} rows in a but {b.shape[0]} in b"
        )
    if damping < 0:
        raise InvalidParameterError(f"damping must be non-negative, got {damping}")
    out_shape = (a.shape[1],) + b.shape[1:]
    if a.size == 0 or not np.any(a):
        return np.zeros(out_shape, dtype=np.result_type(a, b, np.float64))
    u, s, vh = spl.svd(a, full_matrices=False)
    lam = damping * s[0] ** 2
    keep = s > LSTSQ_RCOND * s[0]
    filt = np.zeros_like(s)
    filt[keep] = s[keep] / (s[keep] ** 2 + lam)
    coeffs = dagger(u) @ b
    coeffs = coeffs * (filt[:, None] if coeffs.ndim > 1 else filt)
    return dagger(vh) @ coeffs


def lstsq_rank(a: np.ndarray, rcond: float = LSTSQ_RCOND) -> int:
    """Numerical rank at the same cut-off lstsq uses."""
    if a.size == 0:
        return 0
    s = spl.svdvals(a)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rcond * s[0]))


def orthonormalize(v: np.ndarray) -> ComplexMatrix:
    """Closest matrix with orthonormal columns (polar factor); span is unchanged."""
    u, _ = spl.polar(np.asarray(v, dtype=complex), side="right")
    return u


def complete_unitary(v: np.ndarray, columns: np.ndarray) -> ComplexMatrix:
    """Unitary whose ``columns`` are the columns of the isometry v.

    The remaining columns are an orthonormal basis of the complement of
    span(v), in the order scipy returns them.
    """
    dim, n_cols = v.shape
    u = np.zeros((dim, dim), dtype=complex)
    u[:, columns] = v
    rest = np.setdiff1d(np.arange(dim), columns)
    if rest.size:
        u[:, rest] = spl.null_space(dagger(v))
    return u


def haar_unitary(dim: int, rng: Optional[np.random.Generator] = None) -> ComplexMatrix:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the R-diagonal phases removed."""
    rng = rng if rng is not None else np.random.default_rng()
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = spl.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """GUE sample with unit-variance off-diagonal entries.

    Built as (G + G†)/2 so the result is Hermitian to the last bit.
    """
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + dagger(g))


def check_finite(a: np.ndarray, what: str = "result") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"Non-finite entries in {what}")
    return a
