"""
Colligations

Points of the unit ball, operator tuples, output pairs and colligations
U = [A B; C D] : X + U -> X^d + Y, with transfer-function evaluation and
classification (contractive, isometric, coisometric, unitary).
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, TypeVar

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from .config import SamplingConfig
from .exceptions import DimensionMismatch, DuplicatePoints, OutsideBall, SingularResolvent
from .numerics import (
    ComplexMatrix,
    Tolerances,
    adjoint,
    as_matrix,
    coisometry_residual,
    isometry_residual,
    operator_norm,
    orthonormal_basis,
    sample_ball_points,
    solve_least_squares,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Relative pivot size below which I - Z(lambda)A is treated as singular.
_RESOLVENT_PIVOT_FLOOR = 1e-13

# Alternating polar and affine projections tried before giving up on a unitary intertwiner.
_UNITARY_SEARCH_STEPS = 200


@dataclass(frozen=True)
class BallPoint:
    """
    A point of the open unit ball in C^d.

    Attributes:
        coords: The coordinates lambda_1..lambda_d
        closed: Allow points on the unit sphere (see BallPoint.closure)
    """

    coords: tuple[complex, ...]
    closed: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        coords = tuple(complex(z) for z in self.coords)
        if not coords:
            raise DimensionMismatch("a ball point needs at least one coordinate", blocks=["point"])
        object.__setattr__(self, "coords", coords)
        norm2 = sum(abs(z) ** 2 for z in coords)
        if self.closed:
            if norm2 > 1.0 + 1e-12:
                raise OutsideBall(f"point {coords} lies outside the closed unit ball")
        elif norm2 >= 1.0:
            raise OutsideBall(f"point {coords} lies outside the open unit ball")

    @classmethod
    def closure(cls, coords: Sequence[complex]) -> BallPoint:
        """Construct a point of the closed ball, for checks at the boundary."""
        return cls(tuple(coords), closed=True)

    @classmethod
    def origin(cls, d: int) -> BallPoint:
        """The origin of C^d."""
        return cls((0j,) * d)

    @property
    def d(self) -> int:
        """Number of coordinates."""
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        """Coordinates as a 1-d complex array."""
        return np.array(self.coords, dtype=np.complex128)

    def inner(self, other: BallPoint) -> complex:
        """Return <self, other> = sum_j self_j * conj(other_j)."""
        if other.d != self.d:
            raise DimensionMismatch(f"points of dimension {self.d} and {other.d}")
        return complex(np.vdot(other.array, self.array))

    def z_row(self, dim: int) -> ComplexMatrix:
        """Return Z(lambda) = [lambda_1 I ... lambda_d I] acting on the d-fold sum of C^dim."""
        return np.kron(self.array[None, :], np.eye(dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """A d-tuple of square matrices A_1..A_d on a common state space."""

    blocks: tuple[ComplexMatrix, ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise DimensionMismatch("an operator tuple needs at least one block", blocks=["A"])
        first = np.asarray(self.blocks[0])
        n = first.shape[0] if first.ndim == 2 else -1
        frozen = tuple(
            as_matrix(b, shape=(n, n), name=f"A{j + 1}") for j, b in enumerate(self.blocks)
        )
        object.__setattr__(self, "blocks", frozen)

    @classmethod
    def zeros(cls, d: int, dim: int) -> OperatorTuple:
        return cls(tuple(np.zeros((dim, dim)) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        return int(self.blocks[0].shape[0])

    @property
    def stacked(self) -> ComplexMatrix:
        """Column [A_1; ...; A_d] : X -> X^d."""
        return np.vstack(self.blocks)

    @property
    def adjoint_row(self) -> ComplexMatrix:
        """Row [A_1* ... A_d*] : X^d -> X."""
        return np.hstack([adjoint(b) for b in self.blocks])

    def pencil(self, point: BallPoint) -> ComplexMatrix:
        """Return I - Z(lambda)A = I - sum_j lambda_j A_j."""
        if point.d != self.d:
            raise DimensionMismatch(f"point of dimension {point.d} for a {self.d}-tuple")
        out = np.eye(self.dim, dtype=np.complex128)
        for z, block in zip(point.coords, self.blocks):
            out -= z * block
        return out


@dataclass(frozen=True, eq=False)
class OutputPair:
    """An output pair (C, A) with C : X -> Y."""

    C: ComplexMatrix
    A: OperatorTuple

    def __post_init__(self) -> None:
        c = np.asarray(self.C)
        rows = c.shape[0] if c.ndim == 2 else -1
        object.__setattr__(self, "C", as_matrix(self.C, shape=(rows, self.A.dim), name="C"))

    @property
    def d(self) -> int:
        return self.A.d

    @property
    def dim_x(self) -> int:
        return self.A.dim

    @property
    def dim_y(self) -> int:
        return int(self.C.shape[0])

    @property
    def stacked(self) -> ComplexMatrix:
        """Column [A_1; ...; A_d; C] : X -> X^d + Y."""
        return np.vstack([self.A.stacked, self.C])

    @property
    def contractivity_defect(self) -> ComplexMatrix:
        """Return I - sum_j A_j* A_j - C* C."""
        m = self.stacked
        return np.eye(self.dim_x) - adjoint(m) @ m


@dataclass(frozen=True, eq=False)
class Colligation:
    """
    A colligation U = [A B; C D].

    A and B are given as d row blocks; U maps X + U to X^d + Y.
    """

    A: OperatorTuple
    B: tuple[ComplexMatrix, ...]
    C: ComplexMatrix
    D: ComplexMatrix

    def __post_init__(self) -> None:
        n = self.A.dim
        if len(self.B) != self.A.d:
            raise DimensionMismatch(
                f"B has {len(self.B)} blocks but A has {self.A.d}", blocks=["A", "B"]
            )
        d_matrix = np.asarray(self.D)
        if d_matrix.ndim != 2:
            raise DimensionMismatch("D must be 2-dimensional", blocks=["D"])
        dim_y, dim_u = d_matrix.shape
        object.__setattr__(
            self,
            "B",
            tuple(as_matrix(b, shape=(n, dim_u), name=f"B{j + 1}") for j, b in enumerate(self.B)),
        )
        object.__setattr__(self, "C", as_matrix(self.C, shape=(dim_y, n), name="C"))
        object.__setattr__(self, "D", as_matrix(d_matrix, name="D"))

    @classmethod
    def from_blocks(
        cls,
        a_blocks: Sequence[ArrayLike],
        b_blocks: Sequence[ArrayLike],
        c: ArrayLike,
        d: ArrayLike,
    ) -> Colligation:
        return cls(
            OperatorTuple(tuple(np.asarray(a) for a in a_blocks)),
            tuple(np.asarray(b) for b in b_blocks),
            np.asarray(c),
            np.asarray(d),
        )

    @classmethod
    def from_matrix(cls, u: ArrayLike, d: int, dim_x: int) -> Colligation:
        """
        Split an assembled (d*dimX + dimY) x (dimX + dimU) matrix into blocks.

        Args:
            u: Assembled colligation matrix
            d: Number of variables
            dim_x: State dimension

        Returns:
            The colligation
        """
        m = np.asarray(u, dtype=np.complex128)
        if m.shape[0] < d * dim_x or m.shape[1] < dim_x:
            raise DimensionMismatch(f"matrix of shape {m.shape} too small for d={d}, dimX={dim_x}")
        a = tuple(m[j * dim_x:(j + 1) * dim_x, :dim_x] for j in range(d))
        b = tuple(m[j * dim_x:(j + 1) * dim_x, dim_x:] for j in range(d))
        return cls(OperatorTuple(a), b, m[d * dim_x:, :dim_x], m[d * dim_x:, dim_x:])

    @property
    def d(self) -> int:
        return self.A.d

    @property
    def dim_x(self) -> int:
        return self.A.dim

    @property
    def dim_u(self) -> int:
        return int(self.D.shape[1])

    @property
    def dim_y(self) -> int:
        return int(self.D.shape[0])

    @property
    def pair(self) -> OutputPair:
        return OutputPair(self.C, self.A)

    @property
    def b_stacked(self) -> ComplexMatrix:
        """Column [B_1; ...; B_d] : U -> X^d."""
        return np.vstack(self.B)

    @property
    def matrix(self) -> ComplexMatrix:
        """The assembled block matrix U."""
        return np.block([[self.A.stacked, self.b_stacked], [self.C, self.D]])

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "dimX": self.dim_x,
            "dimU": self.dim_u,
            "dimY": self.dim_y,
        }


def _resolvent_lu(pencil: ComplexMatrix) -> tuple[ComplexMatrix, np.ndarray]:
    """LU factors of I - Z(lambda)A, refusing numerically singular pencils."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(pencil, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= _RESOLVENT_PIVOT_FLOOR * max(1.0, float(pivots.max())):
        raise SingularResolvent(f"I - Z(lambda)A is numerically singular (pivot {pivots.min():.3e})")
    return lu, piv


def resolvent_solve(a: OperatorTuple, point: BallPoint, rhs: ComplexMatrix) -> ComplexMatrix:
    """Return (I - Z(lambda)A)^-1 rhs."""
    if a.dim == 0:
        return np.zeros((0, rhs.shape[1]), dtype=np.complex128)
    lu, piv = _resolvent_lu(a.pencil(point))
    return linalg.lu_solve((lu, piv), rhs)


def resolvent_row(p: OutputPair, point: BallPoint) -> ComplexMatrix:
    """Return C (I - Z(lambda)A)^-1 as a dimY x dimX matrix."""
    if p.dim_x == 0:
        return np.zeros((p.dim_y, 0), dtype=np.complex128)
    lu, piv = _resolvent_lu(p.A.pencil(point))
    return linalg.lu_solve((lu, piv), p.C.T, trans=1).T


def observe(p: OutputPair, point: BallPoint, x: ArrayLike) -> ComplexMatrix:
    """Value at lambda of the observability image C (I - Z(lambda)A)^-1 x."""
    vectors = np.asarray(x, dtype=np.complex128).reshape(p.dim_x, -1)
    return p.C @ resolvent_solve(p.A, point, vectors)


def transfer_eval(c: Colligation, point: BallPoint) -> ComplexMatrix:
    """
    Evaluate S(lambda) = D + C (I - Z(lambda)A)^-1 Z(lambda) B.

    Args:
        c: Colligation
        point: Point lambda of the ball

    Returns:
        The dimY x dimU matrix S(lambda)

    Raises:
        SingularResolvent: I - Z(lambda)A is numerically singular
    """
    if point.d != c.d:
        raise DimensionMismatch(f"point of dimension {point.d} for a colligation in {c.d} variables")
    if not any(point.coords):
        return np.array(c.D)
    zb = point.z_row(c.dim_x) @ c.b_stacked
    return c.D + c.C @ resolvent_solve(c.A, point, zb)


def transfer_eval_adjoint(c: Colligation, point: BallPoint) -> ComplexMatrix:
    """Evaluate S(zeta)* = B* Z(zeta)* (I - A* Z(zeta)*)^-1 C* + D*."""
    if not any(point.coords):
        return adjoint(c.D)
    states = adjoint(resolvent_row(c.pair, point))
    return adjoint(c.b_stacked) @ adjoint(point.z_row(c.dim_x)) @ states + adjoint(c.D)


def evaluate_many(fn: Callable[[BallPoint], T], points: Sequence[BallPoint], threads: int = 1) -> list[T]:
    """
    Evaluate fn at every point, in input order.

    Args:
        fn: Function of a point
        points: Points to evaluate at
        threads: Worker thread bound; 1 evaluates sequentially

    Returns:
        List of results ordered like points
    """
    if threads <= 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, points))


def sample_points(d: int, cfg: SamplingConfig, stream: int = 0, count: int | None = None) -> list[BallPoint]:
    """
    Draw seeded points of the ball.

    Directions are uniform on the sphere and the radius is uniform on
    [0, sample_radius].

    Args:
        d: Number of coordinates
        cfg: Sampling settings
        stream: Index of an independent stream derived from the seed
        count: Number of points (defaults to cfg.sample_count)

    Returns:
        List of distinct points
    """
    n = cfg.sample_count if count is None else count
    coords = sample_ball_points(d, n, cfg.sample_radius, cfg.generator(stream))
    return [BallPoint(tuple(row)) for row in coords]


def check_distinct(points: Sequence[BallPoint]) -> None:
    """Raise DuplicatePoints if two points coincide."""
    if not points:
        return
    coords = np.array([p.array for p in points])
    for i in range(len(points)):
        gaps = np.linalg.norm(coords[i + 1:] - coords[i], axis=1)
        if gaps.size and gaps.min() <= 1e-14:
            raise DuplicatePoints(f"point {i} appears more than once in the sample")


@dataclass
class ColligationClass:
    """Classification of a colligation with its residuals."""

    contractive: bool
    isometric: bool
    coisometric: bool
    unitary: bool
    norm: float
    isometry_residual: float
    coisometry_residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "contractive": self.contractive,
            "isometric": self.isometric,
            "coisometric": self.coisometric,
            "unitary": self.unitary,
            "norm": self.norm,
            "isometry_residual": self.isometry_residual,
            "coisometry_residual": self.coisometry_residual,
        }


@dataclass
class PairClass:
    """Classification of an output pair by the spectrum of its contractivity defect."""

    contractive_pair: bool
    isometric_pair: bool
    min_eigenvalue: float
    max_eigenvalue: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "contractive_pair": self.contractive_pair,
            "isometric_pair": self.isometric_pair,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
        }


def classify_colligation(c: Colligation, tol: Tolerances) -> ColligationClass:
    """Classify a colligation from ||U||, ||U*U - I|| and ||UU* - I||."""
    u = c.matrix
    norm = operator_norm(u)
    iso = isometry_residual(u)
    coiso = coisometry_residual(u)
    isometric = iso <= tol.eq_tol
    coisometric = coiso <= tol.eq_tol
    return ColligationClass(
        contractive=norm <= 1.0 + tol.eq_tol,
        isometric=isometric,
        coisometric=coisometric,
        unitary=isometric and coisometric,
        norm=norm,
        isometry_residual=iso,
        coisometry_residual=coiso,
    )


def classify_pair(p: OutputPair, tol: Tolerances) -> PairClass:
    """Classify an output pair by the spectrum of I - sum_j A_j* A_j - C* C."""
    if p.dim_x == 0:
        return PairClass(True, True, 0.0, 0.0)
    defect = p.contractivity_defect
    w = linalg.eigvalsh((defect + adjoint(defect)) / 2)
    return PairClass(
        contractive_pair=bool(w[0] >= -tol.psd_tol),
        isometric_pair=bool(np.max(np.abs(w)) <= tol.psd_tol),
        min_eigenvalue=float(w[0]),
        max_eigenvalue=float(w[-1]),
    )


def classify(
    obj: Colligation | OutputPair, tol: Tolerances | None = None
) -> ColligationClass | PairClass:
    """
    Classify a colligation or an output pair.

    Args:
        obj: Colligation or OutputPair
        tol: Tolerances (defaults apply when omitted)

    Returns:
        ColligationClass for a colligation, PairClass for a pair
    """
    tol = tol or Tolerances()
    if isinstance(obj, Colligation):
        return classify_colligation(obj, tol)
    if isinstance(obj, OutputPair):
        return classify_pair(obj, tol)
    raise DimensionMismatch(f"cannot classify object of type {type(obj).__name__}")


def solve_intertwiner(
    p1: OutputPair,
    p2: OutputPair,
    tol: Tolerances,
    b1: Sequence[ComplexMatrix] | None = None,
    b2: Sequence[ComplexMatrix] | None = None,
) -> tuple[ComplexMatrix | None, float, float]:
    """
    Intertwiner U with C2 U = C1 and U A1_j = A2_j U, unitary when one exists.

    When input blocks are given, U B1_j = B2_j is imposed as well. All
    constraints are solved at once on vec(U) (column-major Kronecker form).
    For pairs that are not observable the solutions form an affine set
    x0 + span(N); the search starts from the solution closest to I and
    alternates the unitary polar factor with the projection back onto that
    set.

    Returns:
        Tuple of (U or None on dimension mismatch, relative residual,
        ||U*U - I||)
    """
    if p1.d != p2.d or p1.dim_y != p2.dim_y:
        return None, float("inf"), float("inf")
    n1, n2 = p1.dim_x, p2.dim_x
    eye1 = np.eye(n1)
    eye2 = np.eye(n2)

    rows: list[ComplexMatrix] = [np.kron(eye1, p2.C)]
    rhs: list[ComplexMatrix] = [p1.C.reshape(-1, order="F")]
    for a1, a2 in zip(p1.A.blocks, p2.A.blocks):
        rows.append(np.kron(a1.T, eye2) - np.kron(eye1, a2))
        rhs.append(np.zeros(n1 * n2, dtype=np.complex128))
    if b1 is not None and b2 is not None:
        for x1, x2 in zip(b1, b2):
            rows.append(np.kron(x1.T, eye2))
            rhs.append(np.asarray(x2).reshape(-1, order="F"))

    system = np.vstack(rows)
    target = np.concatenate(rhs)
    vec, residual = solve_least_squares(system, target, tol)
    u = vec.reshape((n2, n1), order="F")
    if n1 != n2:
        return u, residual, float("inf")
    if n1 == 0:
        return u, residual, 0.0

    null = orthonormal_basis(system, "kernel", tol)
    if null.shape[1] == 0 or residual > tol.eq_tol:
        return u, residual, isometry_residual(u)

    def project(m: ComplexMatrix) -> ComplexMatrix:
        flat = m.reshape(-1, order="F")
        return (vec + null @ (adjoint(null) @ (flat - vec))).reshape((n2, n1), order="F")

    u = project(np.eye(n1, dtype=np.complex128))
    unitarity = isometry_residual(u)
    for _ in range(_UNITARY_SEARCH_STEPS):
        if unitarity <= tol.eq_tol:
            break
        polar_factor = linalg.polar(u)[0]
        u = project(polar_factor)
        unitarity = isometry_residual(u)
    else:
        logger.debug(f"no unitary intertwiner after {_UNITARY_SEARCH_STEPS} steps (||U*U - I||={unitarity:.3e})")
    residual = float(np.linalg.norm(system @ u.reshape(-1, order="F") - target)) / max(
        1.0, float(np.linalg.norm(target))
    )
    logger.debug(f"intertwiner search: null space dim {null.shape[1]}, ||U*U - I||={unitarity:.3e}")
    return u, residual, unitarity


def unitarily_equivalent_colligations(
    c1: Colligation, c2: Colligation, tol: Tolerances
) -> tuple[bool, ComplexMatrix | None]:
    """
    Decide whether c2 = (U + I) c1 (U* + I) for a unitary U on the state space.

    Returns:
        Tuple of (equivalent, witness U)
    """
    if c1.dim_u != c2.dim_u or c1.dim_y != c2.dim_y or c1.dim_x != c2.dim_x:
        return False, None
    if operator_norm(c1.D - c2.D) > tol.eq_tol:
        return False, None
    u, residual, unitarity = solve_intertwiner(c1.pair, c2.pair, tol, c1.B, c2.B)
    equivalent = residual <= tol.eq_tol and unitarity <= tol.eq_tol
    logger.debug(f"colligation equivalence: residual={residual:.3e}, unitarity={unitarity:.3e}")
    return equivalent, u if equivalent else None
