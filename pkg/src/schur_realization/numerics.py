"""
Numerics

Dense complex linear-algebra primitives with explicit rank and positivity
tolerances. Every other module goes through these helpers so that rank
decisions are made in one place.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .exceptions import (
    ConfigError,
    DimensionMismatch,
    NonFiniteEntries,
    NormExceedsOne,
    NotHermitian,
    NotPSD,
)

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

# Singular values below this are noise whatever the scale of the matrix.
_ABSOLUTE_FLOOR = 100.0 * np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """
    Tolerances used throughout the library.

    Attributes:
        rank_tol: Relative singular-value cutoff for rank decisions
        psd_tol: Eigenvalue floor for positivity
        eq_tol: Bound on residuals of asserted identities
    """

    rank_tol: float = 1e-10
    psd_tol: float = 1e-10
    eq_tol: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("rank_tol", "psd_tol", "eq_tol"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be strictly positive, got {value!r}")

    def cutoff(self, scale: float) -> float:
        """Return the rank threshold for a matrix whose largest singular value is scale."""
        return max(self.rank_tol * scale, _ABSOLUTE_FLOOR)

    def to_dict(self) -> dict[str, float]:
        """Convert to dictionary."""
        return {"rank_tol": self.rank_tol, "psd_tol": self.psd_tol, "eq_tol": self.eq_tol}


def as_matrix(data: ArrayLike, shape: tuple[int, int] | None = None, name: str = "matrix") -> ComplexMatrix:
    """
    Convert input to a read-only complex matrix.

    Args:
        data: Anything numpy can turn into a 2-d array
        shape: Expected shape, checked when given
        name: Block name used in error messages

    Returns:
        A fresh complex128 array with the write flag cleared
    """
    matrix = np.array(data, dtype=np.complex128)
    if shape is not None and matrix.size == 0:
        matrix = matrix.reshape(shape)
    if matrix.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {matrix.shape}", blocks=[name])
    if shape is not None and matrix.shape != shape:
        raise DimensionMismatch(f"{name} has shape {matrix.shape}, expected {shape}", blocks=[name])
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries(f"{name} contains NaN or Inf entries")
    matrix.setflags(write=False)
    return matrix


def adjoint(m: ComplexMatrix) -> ComplexMatrix:
    """Return the conjugate transpose."""
    return m.conj().T


def operator_norm(m: ArrayLike) -> float:
    """Return the largest singular value (0 for empty matrices)."""
    matrix = np.asarray(m, dtype=np.complex128)
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def max_abs(m: ArrayLike) -> float:
    """Return the largest entry modulus (0 for empty matrices)."""
    matrix = np.asarray(m)
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix)))


def isometry_residual(m: ComplexMatrix) -> float:
    """Return ||M*M - I||."""
    return operator_norm(adjoint(m) @ m - np.eye(m.shape[1]))


def coisometry_residual(m: ComplexMatrix) -> float:
    """Return ||MM* - I||."""
    return operator_norm(m @ adjoint(m) - np.eye(m.shape[0]))


def block_diagonal(blocks: list[ComplexMatrix]) -> ComplexMatrix:
    """Block-diagonal matrix that tolerates zero-sized blocks."""
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def hermitian_part(m: ComplexMatrix, tol: Tolerances, name: str = "matrix") -> ComplexMatrix:
    """
    Check that m is Hermitian within eq_tol and return its symmetrization.

    Raises:
        DimensionMismatch: m is not square
        NotHermitian: ||m - m*|| exceeds eq_tol relative to the scale of m
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}", blocks=[name])
    skew = max_abs(m - adjoint(m))
    if skew > tol.eq_tol * max(1.0, max_abs(m)):
        raise NotHermitian(f"{name} is not Hermitian (skew part {skew:.3e})", residual=skew)
    return (m + adjoint(m)) / 2


def psd_sqrt_and_defect(m: ArrayLike, tol: Tolerances) -> tuple[ComplexMatrix, int]:
    """
    Square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in [-psd_tol, 0) are clamped to zero. The rank counts the
    eigenvalues above rank_tol times the largest one.

    Args:
        m: Hermitian matrix
        tol: Tolerances

    Returns:
        Tuple of (square root, rank)

    Raises:
        NotHermitian: m is not Hermitian within eq_tol
        NotPSD: m has an eigenvalue below -psd_tol
    """
    h = hermitian_part(np.asarray(m, dtype=np.complex128), tol)
    n = h.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128), 0

    w, v = linalg.eigh(h)
    if w[0] < -tol.psd_tol:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e} below -psd_tol", residual=float(-w[0]))

    w = np.clip(w, 0.0, None)
    rank = int(np.count_nonzero(w > tol.cutoff(float(w[-1]))))
    root = (v * np.sqrt(w)) @ adjoint(v)
    return (root + adjoint(root)) / 2, rank


def _normalize_phases(columns: ComplexMatrix) -> ComplexMatrix:
    """Rotate every column so that its first non-negligible entry is real positive."""
    out = columns.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        magnitudes = np.abs(col)
        significant = np.flatnonzero(magnitudes > 1e-8 * magnitudes.max())
        if significant.size:
            pivot = col[significant[0]]
            out[:, k] = col * (abs(pivot) / pivot)
    return out


def numerical_rank(m: ArrayLike, tol: Tolerances) -> int:
    """Rank of m at the relative cutoff rank_tol."""
    matrix = np.asarray(m, dtype=np.complex128)
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.count_nonzero(s > tol.cutoff(float(s[0]))))


def orthonormal_basis(
    m: ArrayLike,
    mode: Literal["range", "kernel"],
    tol: Tolerances,
) -> ComplexMatrix:
    """
    Orthonormal basis of the column space or null space of m.

    Columns carry a fixed phase convention (first non-negligible entry real
    and positive) so the output is reproducible for a given input.

    Args:
        m: Matrix
        mode: "range" for the column space, "kernel" for the null space
        tol: Tolerances

    Returns:
        Matrix with orthonormal columns
    """
    matrix = np.asarray(m, dtype=np.complex128)
    rows, cols = matrix.shape
    if matrix.size == 0:
        if mode == "range":
            return np.zeros((rows, 0), dtype=np.complex128)
        return np.eye(cols, dtype=np.complex128)

    u, s, vh = np.linalg.svd(matrix, full_matrices=True)
    rank = int(np.count_nonzero(s > tol.cutoff(float(s[0]))))
    if mode == "range":
        basis = u[:, :rank]
    elif mode == "kernel":
        basis = adjoint(vh)[:, rank:]
    else:
        raise ValueError(f"unknown mode: {mode}")
    return _normalize_phases(basis)


def polar_partial_isometry(t: ArrayLike, tol: Tolerances) -> tuple[ComplexMatrix, ComplexMatrix]:
    """
    Polar decomposition t = g |t| with g a partial isometry.

    Unlike scipy.linalg.polar, g vanishes on the kernel of t, so that
    g*g projects onto the range of |t| and Ker g* = Ker t*.

    Args:
        t: Contraction
        tol: Tolerances

    Returns:
        Tuple of (g, modulus) with modulus = (t*t)^(1/2)

    Raises:
        NormExceedsOne: ||t|| > 1 + eq_tol
    """
    matrix = np.asarray(t, dtype=np.complex128)
    rows, cols = matrix.shape
    if matrix.size == 0:
        return np.zeros((rows, cols), dtype=np.complex128), np.zeros((cols, cols), dtype=np.complex128)

    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    if s[0] > 1.0 + tol.eq_tol:
        raise NormExceedsOne(f"operator norm {s[0]:.6f} exceeds 1", residual=float(s[0] - 1.0))
    rank = int(np.count_nonzero(s > tol.cutoff(float(s[0]))))
    g = u[:, :rank] @ vh[:rank, :]
    modulus = (adjoint(vh) * s) @ vh
    return g, (modulus + adjoint(modulus)) / 2


def pivoted_cholesky(m: ArrayLike, tol: Tolerances) -> tuple[ComplexMatrix, NDArray[np.intp], int]:
    """
    Diagonal-pivoting Cholesky factorization of a Hermitian PSD matrix.

    Stops as soon as the largest remaining diagonal entry falls below
    rank_tol times the first pivot.

    Args:
        m: Hermitian positive semidefinite matrix
        tol: Tolerances

    Returns:
        Tuple of (L, perm, rank) where L has rank columns, is stored in the
        original row ordering and satisfies L L* = m; perm lists the pivot
        order.
    """
    a = hermitian_part(np.asarray(m, dtype=np.complex128), tol).copy()
    n = a.shape[0]
    perm = np.arange(n)
    factor = np.zeros((n, n), dtype=np.complex128)

    rank = 0
    first_pivot = 0.0
    for i in range(n):
        diag = np.real(np.diag(a))[i:]
        j = i + int(np.argmax(diag))
        pivot = float(diag[j - i])
        if i == 0:
            first_pivot = pivot
        if pivot <= tol.cutoff(first_pivot) or pivot <= 0.0:
            break

        if j != i:
            a[[i, j], :] = a[[j, i], :]
            a[:, [i, j]] = a[:, [j, i]]
            factor[[i, j], :i] = factor[[j, i], :i]
            perm[[i, j]] = perm[[j, i]]

        root = np.sqrt(pivot)
        factor[i, i] = root
        factor[i + 1:, i] = a[i + 1:, i] / root
        column = factor[i + 1:, i]
        a[i + 1:, i + 1:] -= np.outer(column, column.conj())
        rank += 1

    logger.debug(f"pivoted Cholesky: n={n}, rank={rank}")
    lower = np.zeros((n, rank), dtype=np.complex128)
    lower[perm] = factor[:, :rank]
    return lower, perm, rank


def solve_least_squares(a: ArrayLike, b: ArrayLike, tol: Tolerances) -> tuple[ComplexMatrix, float]:
    """
    Minimum-norm least-squares solution of a x = b.

    Returns:
        Tuple of (x, residual) where residual = ||a x - b|| / max(1, ||b||)
    """
    lhs = np.asarray(a, dtype=np.complex128)
    rhs = np.asarray(b, dtype=np.complex128)
    if lhs.shape[0] != rhs.shape[0]:
        raise DimensionMismatch(f"least squares: {lhs.shape} against {rhs.shape}")
    if lhs.size == 0 or rhs.size == 0:
        x = np.zeros((lhs.shape[1],) + rhs.shape[1:], dtype=np.complex128)
        norm = float(np.linalg.norm(rhs))
        return x, norm / max(1.0, norm)
    x, *_ = linalg.lstsq(lhs, rhs, cond=tol.rank_tol)
    scale = max(1.0, float(np.linalg.norm(rhs)))
    return x, float(np.linalg.norm(lhs @ x - rhs)) / scale


def pseudo_inverse(m: ComplexMatrix, tol: Tolerances) -> ComplexMatrix:
    """Moore-Penrose inverse with the library rank cutoff."""
    if m.size == 0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=np.complex128)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > tol.cutoff(float(s[0]))
    return (adjoint(vh[keep]) / s[keep]) @ adjoint(u[:, keep])


def subspace_intersection_dim(q1: ComplexMatrix, q2: ComplexMatrix, tol: Tolerances) -> int:
    """Number of zero principal angles between the spans of two orthonormal bases."""
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        return 0
    cosines = np.linalg.svd(adjoint(q1) @ q2, compute_uv=False)
    return int(np.count_nonzero(cosines >= 1.0 - tol.eq_tol))


def jsonable(value: Any) -> Any:
    """Recursively convert numpy and complex values into JSON-friendly objects."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return value


def sample_ball_points(d: int, count: int, radius: float, rng: np.random.Generator) -> NDArray[np.complex128]:
    """
    Seeded points of the ball of the given radius in C^d, one per row.

    Directions are uniform on the sphere and the norm is uniform on [0, radius].
    """
    directions = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(0.0, 1.0, size=count)
    return directions * radii[:, None]
