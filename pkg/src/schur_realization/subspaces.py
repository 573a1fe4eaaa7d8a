"""
Subspaces

The canonical subspace D of X^d spanned by the generators
Z(zeta)* (I - A* Z(zeta)*)^-1 C* y, its orthocomplement, the isometry V on
D + Y determined by a Schur function sharing the kernel of the pair, the
range of V, and the degeneracy space U0 = {u : S(lambda) u = 0}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .colligation import BallPoint, OutputPair, classify_pair, evaluate_many, resolvent_row, sample_points
from .config import SamplingConfig
from .exceptions import DimensionMismatch, LeastSquaresInconsistent, NotContractivePair, RankInstability
from .kernels import SchurEvaluator, iter_taylor_degrees, multi_indices
from .numerics import (
    ComplexMatrix,
    Tolerances,
    adjoint,
    isometry_residual,
    numerical_rank,
    operator_norm,
    orthonormal_basis,
    solve_least_squares,
)

logger = logging.getLogger(__name__)

# Streams of the seeded generator used by this module.
_GENERATOR_STREAM = 1
_MULTIPLIER_STREAM = 2


@dataclass
class SubspaceBasis:
    """
    Orthonormal bases of a subspace and of its orthocomplement.

    Attributes:
        ambient_dim: Dimension of the ambient space
        basis: Orthonormal columns spanning the subspace
        complement: Orthonormal columns spanning the orthocomplement
        degree: Taylor degree at which the span was decided, if any
        stabilized: False when the degree cap stopped the enumeration
    """

    ambient_dim: int
    basis: ComplexMatrix
    complement: ComplexMatrix
    degree: int | None = None
    stabilized: bool = True

    @classmethod
    def from_spanning(cls, m: ComplexMatrix, tol: Tolerances, **meta: Any) -> SubspaceBasis:
        """Subspace spanned by the columns of m."""
        basis = orthonormal_basis(m, "range", tol)
        complement = orthonormal_basis(adjoint(basis), "kernel", tol)
        return cls(int(m.shape[0]), basis, complement, **meta)

    @classmethod
    def from_kernel(cls, m: ComplexMatrix, tol: Tolerances) -> SubspaceBasis:
        """Null space of m."""
        basis = orthonormal_basis(m, "kernel", tol)
        complement = orthonormal_basis(adjoint(basis), "kernel", tol)
        return cls(int(m.shape[1]), basis, complement)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def complement_dim(self) -> int:
        return int(self.complement.shape[1])

    @property
    def projector(self) -> ComplexMatrix:
        return self.basis @ adjoint(self.basis)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ambient_dim": self.ambient_dim,
            "dim": self.dim,
            "complement_dim": self.complement_dim,
            "degree": self.degree,
            "stabilized": self.stabilized,
        }


@dataclass
class IsometryV:
    """
    The map V : D + Y -> X + U in the orthonormal basis of D.

    V = [A_V B_V; C_V D_V] with A_V = A*|D, B_V = C*, D_V = S(0)*, and C_V
    fitted so that C_V (generator) = (S(zeta)* - S(0)*) y.
    """

    a_v: ComplexMatrix
    b_v: ComplexMatrix
    c_v: ComplexMatrix
    d_v: ComplexMatrix
    range_space: SubspaceBasis
    isometry_residual: float
    generator_residual: float
    tol: Tolerances = field(default_factory=Tolerances, repr=False)

    @property
    def matrix(self) -> ComplexMatrix:
        return np.block([[self.a_v, self.b_v], [self.c_v, self.d_v]])

    @property
    def isometric(self) -> bool:
        return self.isometry_residual <= self.tol.eq_tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "isometric": self.isometric,
            "isometry_residual": self.isometry_residual,
            "generator_residual": self.generator_residual,
            "range_dim": self.range_space.dim,
            "range_complement_dim": self.range_space.complement_dim,
        }


def sampled_generators(p: OutputPair, points: list[BallPoint], threads: int = 1) -> ComplexMatrix:
    """Columns Z(zeta)* (I - A* Z(zeta)*)^-1 C* for every sample point, side by side."""

    def generator(point: BallPoint) -> ComplexMatrix:
        return adjoint(point.z_row(p.dim_x)) @ adjoint(resolvent_row(p, point))

    blocks = evaluate_many(generator, points, threads)
    if not blocks:
        return np.zeros((p.d * p.dim_x, 0), dtype=np.complex128)
    return np.hstack(blocks)


def _degree_generators(p: OutputPair, n: int, previous: dict) -> ComplexMatrix:
    """Generators v_alpha, |alpha| = n, with j-th block c_(alpha - e_j)."""
    columns = []
    for alpha in multi_indices(p.d, n):
        v = np.zeros((p.d * p.dim_x, p.dim_y), dtype=np.complex128)
        for j in range(p.d):
            if alpha[j]:
                lower = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
                v[j * p.dim_x:(j + 1) * p.dim_x] = previous[lower]
        columns.append(v)
    return np.hstack(columns)


def domain_subspace(
    p: OutputPair, cfg: SamplingConfig | None = None, tol: Tolerances | None = None
) -> SubspaceBasis:
    """
    Compute the canonical subspace D of X^d and its complement.

    Generators are enumerated from the Taylor coefficients of the resolvent
    by increasing total degree, until two consecutive degrees add no rank
    or the degree cap is reached. The rank is cross-checked against the
    span of generators sampled at seeded points.

    Args:
        p: Contractive output pair
        cfg: Sampling settings
        tol: Tolerances

    Returns:
        SubspaceBasis of D in X^d

    Raises:
        NotContractivePair: The pair is not contractive
        RankInstability: Taylor and sampled ranks disagree
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    if not classify_pair(p, tol).contractive_pair:
        raise NotContractivePair("domain_subspace needs a contractive pair")

    ambient = p.d * p.dim_x
    cap = cfg.cap_for(p.d, p.dim_x)
    span = np.zeros((ambient, 0), dtype=np.complex128)
    rank = 0
    stable = 0
    degree = 0
    previous: dict = {}
    for n, level in iter_taylor_degrees(p, cap):
        if n > 0:
            degree = n
            span = orthonormal_basis(np.hstack([span, _degree_generators(p, n, previous)]), "range", tol)
            if span.shape[1] == rank:
                stable += 1
            else:
                stable = 0
                rank = span.shape[1]
            if stable >= 2 or rank == ambient:
                break
        previous = level

    stabilized = stable >= 2 or rank == ambient
    if not stabilized:
        logger.warning(f"canonical subspace: degree cap {cap} reached before the span stabilized")

    if cfg.sample_count * p.dim_y < rank:
        logger.warning(
            f"canonical subspace: {cfg.sample_count} points give at most {cfg.sample_count * p.dim_y} "
            f"sampled generators, fewer than its dimension {rank}"
        )
    sampled_rank = numerical_rank(
        sampled_generators(p, sample_points(p.d, cfg, _GENERATOR_STREAM), cfg.threads), tol
    )
    if sampled_rank != rank:
        raise RankInstability(
            f"canonical subspace rank {rank} from Taylor coefficients, {sampled_rank} from samples",
            expected=rank,
            actual=sampled_rank,
        )

    logger.debug(f"canonical subspace: dim={rank} of {ambient}, degree={degree}")
    return SubspaceBasis.from_spanning(span, tol, degree=degree, stabilized=stabilized)


def build_V_and_check(  # noqa: N802
    s: SchurEvaluator,
    p: OutputPair,
    dsub: SubspaceBasis,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
    require_isometry: bool = True,
) -> IsometryV:
    """
    Assemble V on D + Y and check that it is isometric.

    C_V is fitted by least squares on the generator equations at seeded
    points; the range of V is returned with its complement.

    Args:
        s: Schur function
        p: Output pair with the same kernel as s
        dsub: Canonical subspace of p
        cfg: Sampling settings
        tol: Tolerances
        require_isometry: Raise when V fails the isometry check

    Returns:
        IsometryV

    Raises:
        LeastSquaresInconsistent: The generator equations have no solution,
            or V is not isometric (the kernels of s and p differ)
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    if s.d != p.d or s.dim_y != p.dim_y:
        raise DimensionMismatch(
            f"function on C^{s.d} into C^{s.dim_y} against a pair on C^{p.d} into C^{p.dim_y}",
            blocks=["S", "C"],
        )
    q = dsub.basis
    points = sample_points(p.d, cfg, _GENERATOR_STREAM)

    a_v = p.A.adjoint_row @ q
    b_v = adjoint(p.C)
    d_v = adjoint(s.at_origin)

    generators = sampled_generators(p, points, cfg.threads)
    coordinates = adjoint(q) @ generators
    targets = np.hstack([s.adjoint(pt) - d_v for pt in points])

    c_v_adj, residual = solve_least_squares(adjoint(coordinates), adjoint(targets), tol)
    c_v = adjoint(c_v_adj)
    if residual > tol.eq_tol:
        raise LeastSquaresInconsistent(
            f"generator equations for C_V have residual {residual:.3e}", residual=residual
        )

    v = np.block([[a_v, b_v], [c_v, d_v]])
    iso = isometry_residual(v)
    result = IsometryV(
        a_v=a_v,
        b_v=b_v,
        c_v=c_v,
        d_v=d_v,
        range_space=SubspaceBasis.from_spanning(v, tol),
        isometry_residual=iso,
        generator_residual=residual,
        tol=tol,
    )
    logger.debug(f"V: isometry residual {iso:.3e}, generator residual {residual:.3e}")
    if require_isometry and not result.isometric:
        raise LeastSquaresInconsistent(
            f"V is not isometric (residual {iso:.3e}): K_S differs from K_C,A", residual=iso
        )
    return result


def kernel_of_multiplier(
    s: SchurEvaluator, cfg: SamplingConfig | None = None, tol: Tolerances | None = None
) -> SubspaceBasis:
    """
    The subspace U0 = {u : S(lambda) u = 0 for all lambda} of the input space.

    Stacks S at seeded points, together with the Taylor coefficients of S
    when a realization is known, and takes the null space.
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    points = sample_points(s.d, cfg, _MULTIPLIER_STREAM)
    rows = [s.at_origin] + s.values(points, cfg.threads)

    dim_x = s.colligation.dim_x if s.colligation is not None else 0
    coefficients = s.taylor_coefficients(cfg.cap_for(s.d, max(dim_x, 1)))
    if coefficients:
        rows.extend(coefficients.values())

    u0 = SubspaceBasis.from_kernel(np.vstack(rows), tol)
    logger.debug(f"degeneracy space: dim={u0.dim} of {s.dim_u}")
    return u0


def complement_identity_residual(p: OutputPair, dsub: SubspaceBasis, degree: int = 8) -> float:
    """
    Largest Taylor coefficient of sum_j lambda_j (O h_j)(lambda) over h in the complement of D.

    The coefficient at alpha is sum_j c_(alpha - e_j)* h_j, so it vanishes
    exactly on the orthocomplement of D.
    """
    if dsub.complement_dim == 0:
        return 0.0
    worst = 0.0
    previous: dict = {}
    for n, level in iter_taylor_degrees(p, degree):
        if n > 0:
            generators = _degree_generators(p, n, previous)
            worst = max(worst, operator_norm(adjoint(generators) @ dsub.complement))
        previous = level
    return worst


def range_complement_residual(
    s: SchurEvaluator, p: OutputPair, v: IsometryV, points: list[BallPoint]
) -> float:
    """
    Largest value of (O x)(zeta) + S(zeta) u over (x, u) in the complement of the range of V.
    """
    complement = v.range_space.complement
    if complement.shape[1] == 0:
        return 0.0
    x = complement[: p.dim_x]
    u = complement[p.dim_x:]
    worst = 0.0
    for point in points:
        values = resolvent_row(p, point) @ x + s(point) @ u
        worst = max(worst, operator_norm(values))
    return worst
