"""
Completion

Constrained contractive completion of U* = [[T11, T12], [X, T22]] for a
fixed output pair (C, A) and a Schur function S sharing its kernel:

    T11 = A* on the complement of D
    T12 = [A* on D, C*]
    T22 = [C_V, S(0)*]

The free block X is parametrized by contractions Q from the range of
(I - G1 G1*)^(1/2) into U0 = {u : S u = 0}; B is read off X and C_V.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg

from .colligation import (
    Colligation,
    ColligationClass,
    OutputPair,
    classify_colligation,
    classify_pair,
    sample_points,
    transfer_eval,
)
from .config import SamplingConfig
from .exceptions import (
    NecessaryConditionsFail,
    NormExceedsOne,
    NotPSD,
    ParameterShapeMismatch,
    RankInstability,
)
from .kernels import SchurEvaluator
from .numerics import (
    ComplexMatrix,
    Tolerances,
    adjoint,
    block_diagonal,
    isometry_residual,
    numerical_rank,
    operator_norm,
    orthonormal_basis,
    polar_partial_isometry,
    psd_sqrt_and_defect,
    subspace_intersection_dim,
)
from .subspaces import IsometryV, SubspaceBasis, build_V_and_check, kernel_of_multiplier

logger = logging.getLogger(__name__)

_REPRODUCTION_STREAM = 3


@dataclass
class CompletionBlocks:
    """
    Fixed blocks of the completion problem in orthonormal coordinates.

    Coordinates: the complement of D uses dsub.complement, D + Y uses
    (dsub.basis, identity on Y), U0 uses u0.basis.
    """

    pair: OutputPair
    schur: SchurEvaluator
    dsub: SubspaceBasis
    v: IsometryV
    u0: SubspaceBasis
    t11: ComplexMatrix
    t12: ComplexMatrix
    t22: ComplexMatrix
    g1: ComplexMatrix
    g2: ComplexMatrix
    defect1: ComplexMatrix
    defect1_range: ComplexMatrix
    cfg: SamplingConfig = field(default_factory=SamplingConfig, repr=False)
    tol: Tolerances = field(default_factory=Tolerances, repr=False)

    @property
    def dim_complement(self) -> int:
        return int(self.t11.shape[1])

    @property
    def rank_defect1(self) -> int:
        return int(self.defect1_range.shape[1])

    @property
    def dim_u0(self) -> int:
        return self.u0.dim

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_D": self.dsub.dim,
            "dim_D_perp": self.dim_complement,
            "dim_U0": self.dim_u0,
            "rank_defect1": self.rank_defect1,
            "norm_T11": operator_norm(self.t11),
            "norm_G1": operator_norm(self.g1),
        }


@dataclass
class CompletionParameter:
    """A contraction Q from Ran (I - G1 G1*)^(1/2) into U0, in the bases of both."""

    q: ComplexMatrix
    tol: Tolerances = field(default_factory=Tolerances, repr=False)

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=np.complex128)
        if self.q.ndim != 2:
            raise ParameterShapeMismatch(f"Q must be 2-dimensional, got shape {self.q.shape}")
        norm = operator_norm(self.q)
        if norm > 1.0 + self.tol.eq_tol:
            raise NormExceedsOne(f"parameter Q has norm {norm:.6f}", residual=norm - 1.0)

    @classmethod
    def zero(cls, blocks: CompletionBlocks) -> CompletionParameter:
        """The central parameter Q = 0."""
        return cls(np.zeros((blocks.dim_u0, blocks.rank_defect1), dtype=np.complex128), blocks.tol)

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.q.shape[0]), int(self.q.shape[1])

    @property
    def is_isometric(self) -> bool:
        return isometry_residual(self.q) <= self.tol.eq_tol if self.q.shape[1] else True

    @property
    def is_unitary(self) -> bool:
        return self.q.shape[0] == self.q.shape[1] and self.is_isometric


@dataclass
class Completion:
    """One member of the completion family."""

    parameter: CompletionParameter
    x: ComplexMatrix
    b_stacked: ComplexMatrix
    colligation: Colligation
    adjoint_norm: float
    weak_coisometry_residual: float
    orthogonality_residual: float

    @property
    def b_blocks(self) -> tuple[ComplexMatrix, ...]:
        return self.colligation.B

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameter_shape": list(self.parameter.shape),
            "parameter_isometric": self.parameter.is_isometric,
            "adjoint_norm": self.adjoint_norm,
            "weak_coisometry_residual": self.weak_coisometry_residual,
            "orthogonality_residual": self.orthogonality_residual,
        }


def _defect_root(m: ComplexMatrix, tol: Tolerances, name: str) -> tuple[ComplexMatrix, ComplexMatrix]:
    """(M^(1/2), pseudo-inverse of M^(1/2)) for a PSD defect M, eigenvalues below the cutoff dropped."""
    try:
        root, _ = psd_sqrt_and_defect(m, tol)
    except NotPSD as e:
        raise NecessaryConditionsFail(f"{name} is not positive semidefinite", residual=e.residual) from e
    if m.shape[0] == 0:
        return root, root
    w, vecs = linalg.eigh((m + adjoint(m)) / 2)
    keep = w > tol.cutoff(float(max(w[-1], 0.0)))
    inverse_root = (vecs[:, keep] / np.sqrt(w[keep])) @ adjoint(vecs[:, keep])
    return root, inverse_root


def parrott_factors(
    t11: ComplexMatrix, t12: ComplexMatrix, t22: ComplexMatrix, tol: Tolerances
) -> tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    """
    Factors of the contractive completions X of [[T11, T12], [X, T22]].

    G1 solves G1 (I - T12 T12*)^(1/2) = T11* with minimum norm, and G2 is
    the partial isometry in the polar form of T22.

    Returns:
        Tuple of (G1, G2, (I - G1 G1*)^(1/2))

    Raises:
        NecessaryConditionsFail: A defect is not PSD
        NormExceedsOne: T22 is not a contraction
    """
    _, inverse_root = _defect_root(np.eye(t12.shape[0]) - t12 @ adjoint(t12), tol, "I - T12 T12*")
    g1 = adjoint(t11) @ inverse_root
    defect1, _ = _defect_root(np.eye(t11.shape[1]) - g1 @ adjoint(g1), tol, "I - G1 G1*")
    g2, _ = polar_partial_isometry(t22, tol)
    return g1, g2, defect1


def parrott_fill(
    t12: ComplexMatrix, g1: ComplexMatrix, g2: ComplexMatrix, defect1: ComplexMatrix, k: ComplexMatrix
) -> ComplexMatrix:
    """X = -G2 T12* G1* + K (I - G1 G1*)^(1/2), K a contraction into Ker T22*."""
    return -g2 @ adjoint(t12) @ adjoint(g1) + k @ defect1


def build_blocks(
    s: SchurEvaluator,
    p: OutputPair,
    v: IsometryV,
    dsub: SubspaceBasis,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
    u0: SubspaceBasis | None = None,
) -> CompletionBlocks:
    """
    Assemble T11, T12, T22 and the factors G1, G2 of the completion problem.

    G1 solves G1 (I - T12 T12*)^(1/2) = T11* with minimum norm, so that
    Ker G1* = Ker T11; G2 is the partial isometry in the polar form of T22.

    Args:
        s: Schur function
        p: Output pair
        v: Isometry V built from s and p
        dsub: Canonical subspace of p
        cfg: Sampling settings
        tol: Tolerances
        u0: Degeneracy space of s (computed when omitted)

    Returns:
        CompletionBlocks

    Raises:
        NecessaryConditionsFail: [T12; T22] is not isometric, a defect is
            not PSD, the kernel condition on G1 fails, or Ker T22* differs from U0
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    if not v.isometric:
        raise NecessaryConditionsFail(
            f"[T12; T22] is not isometric (residual {v.isometry_residual:.3e})",
            residual=v.isometry_residual,
        )
    a_star = p.A.adjoint_row
    t11 = a_star @ dsub.complement
    t12 = np.hstack([v.a_v, v.b_v])
    t22 = np.hstack([v.c_v, v.d_v])

    top_norm = operator_norm(np.hstack([t11, t12]))
    if top_norm > 1.0 + tol.eq_tol:
        raise NecessaryConditionsFail(f"[T11 T12] has norm {top_norm:.6f}", residual=top_norm - 1.0)
    split = t11 @ adjoint(dsub.complement) + v.a_v @ adjoint(dsub.basis) - a_star
    if operator_norm(split) > tol.eq_tol:
        raise NecessaryConditionsFail("A* does not split over D and its complement", residual=operator_norm(split))

    g1, g2, defect1 = parrott_factors(t11, t12, t22, tol)

    kernel_t11 = orthonormal_basis(t11, "kernel", tol)
    leak = operator_norm(adjoint(g1) @ kernel_t11) if kernel_t11.size else 0.0
    if numerical_rank(g1, tol) != numerical_rank(t11, tol) or leak > tol.eq_tol:
        raise NecessaryConditionsFail("Ker G1* differs from Ker T11", residual=leak)

    defect1_range = orthonormal_basis(defect1, "range", tol)

    if u0 is None:
        u0 = kernel_of_multiplier(s, cfg, tol)
    kernel_t22 = orthonormal_basis(adjoint(t22), "kernel", tol)
    common = subspace_intersection_dim(kernel_t22, u0.basis, tol)
    if not kernel_t22.shape[1] == u0.dim == common:
        raise RankInstability(
            f"Ker T22* has dimension {kernel_t22.shape[1]}, U0 has {u0.dim}, common {common}",
            expected=u0.dim,
            actual=kernel_t22.shape[1],
        )

    logger.debug(
        f"completion blocks: dim D_perp={t11.shape[1]}, rank defect1={defect1_range.shape[1]}, dim U0={u0.dim}"
    )
    return CompletionBlocks(
        pair=p,
        schur=s,
        dsub=dsub,
        v=v,
        u0=u0,
        t11=t11,
        t12=t12,
        t22=t22,
        g1=g1,
        g2=g2,
        defect1=defect1,
        defect1_range=defect1_range,
        cfg=cfg,
        tol=tol,
    )


def parrott_complete(blocks: CompletionBlocks, q: CompletionParameter | None = None) -> Completion:
    """
    Complete the colligation for the parameter Q (the central completion when omitted).

    X = -G2 T12* G1* + Q (I - G1 G1*)^(1/2), and B = [X*; C_V*] read back
    into X^d through the bases of the complement of D and of D.

    Args:
        blocks: Output of build_blocks
        q: Contraction from Ran (I - G1 G1*)^(1/2) into U0

    Returns:
        Completion

    Raises:
        ParameterShapeMismatch: Q has the wrong shape
        NecessaryConditionsFail: G2* Q (I - G1 G1*)^(1/2) does not vanish
    """
    tol = blocks.tol
    if q is None:
        q = CompletionParameter.zero(blocks)
    expected = (blocks.dim_u0, blocks.rank_defect1)
    if q.shape != expected:
        raise ParameterShapeMismatch(f"Q has shape {q.shape}, expected {expected}")

    q_ambient = blocks.u0.basis @ q.q @ adjoint(blocks.defect1_range)
    free = q_ambient @ blocks.defect1
    x = parrott_fill(blocks.t12, blocks.g1, blocks.g2, blocks.defect1, q_ambient)

    orthogonality = operator_norm(adjoint(blocks.g2) @ free)
    if orthogonality > tol.eq_tol:
        raise NecessaryConditionsFail(
            f"G2* Q (I - G1 G1*)^(1/2) has norm {orthogonality:.3e}", residual=orthogonality
        )

    dsub, v, p = blocks.dsub, blocks.v, blocks.pair
    b_stacked = dsub.complement @ adjoint(x) + dsub.basis @ adjoint(v.c_v)
    b_blocks = tuple(b_stacked[j * p.dim_x:(j + 1) * p.dim_x] for j in range(p.d))
    colligation = Colligation(p.A, b_blocks, p.C, blocks.schur.at_origin)

    u_adjoint = np.block([[blocks.t11, blocks.t12], [x, blocks.t22]])
    completion = Completion(
        parameter=q,
        x=x,
        b_stacked=b_stacked,
        colligation=colligation,
        adjoint_norm=operator_norm(u_adjoint),
        weak_coisometry_residual=weak_coisometry_residual(colligation, dsub),
        orthogonality_residual=orthogonality,
    )
    logger.debug(
        f"completion: ||U*||={completion.adjoint_norm:.12f}, "
        f"weak coisometry residual={completion.weak_coisometry_residual:.3e}"
    )
    return completion


def weak_coisometry_residual(c: Colligation, dsub: SubspaceBasis) -> float:
    """Return ||E* U U* E - I|| with E the embedding of D + Y into X^d + Y."""
    e = block_diagonal([dsub.basis, np.eye(c.dim_y, dtype=np.complex128)])
    return isometry_residual(adjoint(c.matrix) @ e)


def isometric_parameter(blocks: CompletionBlocks) -> CompletionParameter:
    """
    The isometric parameter [I; 0].

    Raises:
        ParameterShapeMismatch: dim Ran (I - G1 G1*)^(1/2) exceeds dim U0
    """
    u, r = blocks.dim_u0, blocks.rank_defect1
    if r > u:
        raise ParameterShapeMismatch(f"no isometry from a {r}-dimensional space into a {u}-dimensional one")
    return CompletionParameter(np.eye(u, r, dtype=np.complex128), blocks.tol)


def unitary_parameter(blocks: CompletionBlocks) -> CompletionParameter:
    """
    The unitary parameter I.

    Raises:
        ParameterShapeMismatch: dim Ran (I - G1 G1*)^(1/2) differs from dim U0
    """
    u, r = blocks.dim_u0, blocks.rank_defect1
    if r != u:
        raise ParameterShapeMismatch(f"no unitary between spaces of dimension {r} and {u}")
    return CompletionParameter(np.eye(u, dtype=np.complex128), blocks.tol)


def completion_family_sample(
    blocks: CompletionBlocks, count: int, rng: np.random.Generator
) -> list[CompletionParameter]:
    """Seeded contractive parameters: Gaussian directions scaled to a uniform norm in [0, 1]."""
    u, r = blocks.dim_u0, blocks.rank_defect1
    params = []
    for _ in range(count):
        if u * r == 0:
            params.append(CompletionParameter.zero(blocks))
            continue
        g = rng.standard_normal((u, r)) + 1j * rng.standard_normal((u, r))
        scale = rng.uniform(0.0, 1.0)
        params.append(CompletionParameter(g / operator_norm(g) * scale, blocks.tol))
    return params


@dataclass
class ReducedFunction:
    """S restricted to the orthocomplement of U0, so that S = [S~ 0]."""

    schur: SchurEvaluator
    complement: ComplexMatrix
    residual: float
    trivial_kernel: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_u": self.schur.dim_u,
            "residual": self.residual,
            "trivial_kernel": self.trivial_kernel,
        }


def reduced_function(
    s: SchurEvaluator,
    u0: SubspaceBasis,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> ReducedFunction:
    """
    Split off the degeneracy space: S~ = S on the orthocomplement of U0.

    The residual is the largest ||S(zeta) u|| over sampled zeta and unit u in U0.
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    reduced = s.compose_right(u0.complement, label=f"{s.label} reduced")
    residual = 0.0
    if u0.dim:
        points = sample_points(s.d, cfg, _REPRODUCTION_STREAM)
        residual = max(operator_norm(value @ u0.basis) for value in s.values(points, cfg.threads))
    trivial = reduced.dim_u == 0 or kernel_of_multiplier(reduced, cfg, tol).dim == 0
    return ReducedFunction(reduced, u0.complement, residual, trivial)


@dataclass
class CompletionCheck:
    """Weak coisometry, reproduction of S, and classification of a completed colligation."""

    weakly_coisometric: bool
    weak_coisometry_residual: float
    norm: float
    reproduction_error: float
    classification: ColligationClass

    def to_dict(self) -> dict[str, Any]:
        return {
            "weakly_coisometric": self.weakly_coisometric,
            "weak_coisometry_residual": self.weak_coisometry_residual,
            "norm": self.norm,
            "reproduction_error": self.reproduction_error,
            **self.classification.to_dict(),
        }


def check_completion(
    c: Colligation,
    dsub: SubspaceBasis,
    s: SchurEvaluator,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> CompletionCheck:
    """
    Check a completion against the function it should realize.

    Args:
        c: Completed colligation
        dsub: Canonical subspace of its output pair
        s: Target Schur function
        cfg: Sampling settings
        tol: Tolerances

    Returns:
        CompletionCheck
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    classification = classify_colligation(c, tol)
    residual = weak_coisometry_residual(c, dsub)
    points = sample_points(c.d, cfg, _REPRODUCTION_STREAM)
    targets = s.values(points, cfg.threads)
    error = max(operator_norm(transfer_eval(c, pt) - target) for pt, target in zip(points, targets))
    return CompletionCheck(
        weakly_coisometric=classification.contractive and residual <= tol.eq_tol,
        weak_coisometry_residual=residual,
        norm=classification.norm,
        reproduction_error=error,
        classification=classification,
    )


@dataclass
class FamilyReport:
    """Shape of the completion family and which kinds of realization it contains."""

    dim_complement: int
    rank_defect1: int
    dim_u0: int
    kernel_dim: int
    isometric_pair: bool
    coisometric_achievable: bool
    unitary_achievable: bool
    unique: bool
    parameter_dim: int
    reduction_check: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_D_perp": self.dim_complement,
            "rank_defect1": self.rank_defect1,
            "dim_U0": self.dim_u0,
            "dim_ker_A_star_in_D_perp": self.kernel_dim,
            "isometric_pair": self.isometric_pair,
            "coisometric_achievable": self.coisometric_achievable,
            "unitary_achievable": self.unitary_achievable,
            "unique": self.unique,
            "parameter_dim": self.parameter_dim,
            "reduction_check": self.reduction_check,
        }


def _reduction_check(blocks: CompletionBlocks, isometric_pair: bool) -> dict[str, Any] | None:
    """
    Build W = [U0-complement, 0] with as many zero columns as rank (I - G1 G1*)^(1/2),
    and verify that S W admits a coisometric (and, for an isometric pair, unitary) realization.
    """
    tol, cfg = blocks.tol, blocks.cfg
    r = blocks.rank_defect1
    complement = blocks.u0.complement
    width = complement.shape[1] + r
    if width == 0:
        return None
    w = np.hstack([complement, np.zeros((complement.shape[0], r), dtype=np.complex128)])
    s_w = blocks.schur.compose_right(w, label=f"{blocks.schur.label} W")

    v_w = build_V_and_check(s_w, blocks.pair, blocks.dsub, cfg, tol)
    blocks_w = build_blocks(s_w, blocks.pair, v_w, blocks.dsub, cfg, tol)
    completion = parrott_complete(blocks_w, isometric_parameter(blocks_w))
    coisometric = classify_colligation(completion.colligation, tol)
    result: dict[str, Any] = {
        "dim_U0_W": blocks_w.dim_u0,
        "coisometric": coisometric.coisometric,
        "coisometry_residual": coisometric.coisometry_residual,
    }
    if isometric_pair and blocks_w.dim_u0 == blocks_w.rank_defect1:
        unitary = parrott_complete(blocks_w, unitary_parameter(blocks_w))
        result["unitary"] = classify_colligation(unitary.colligation, tol).unitary
    return result


def classify_family(blocks: CompletionBlocks, check_reduction: bool = True) -> FamilyReport:
    """
    Classify the completion family of a pair and a Schur function.

    A coisometric member exists iff rank (I - G1 G1*)^(1/2) <= dim U0; a
    unitary one iff moreover the pair is isometric and the kernel of A* on
    the complement of D has the dimension of U0. The family is a single
    point iff one of the two spaces Q acts between is zero.

    Args:
        blocks: Output of build_blocks
        check_reduction: Also verify that S W admits a coisometric realization

    Returns:
        FamilyReport
    """
    tol = blocks.tol
    r, u = blocks.rank_defect1, blocks.dim_u0
    kernel_dim = blocks.dim_complement - numerical_rank(blocks.t11, tol)
    isometric_pair = classify_pair(blocks.pair, tol).isometric_pair
    report = FamilyReport(
        dim_complement=blocks.dim_complement,
        rank_defect1=r,
        dim_u0=u,
        kernel_dim=kernel_dim,
        isometric_pair=isometric_pair,
        coisometric_achievable=r <= u,
        unitary_achievable=isometric_pair and kernel_dim == u,
        unique=r == 0 or u == 0,
        parameter_dim=r * u,
    )
    if check_reduction:
        report.reduction_check = _reduction_check(blocks, isometric_pair)
    logger.debug(f"completion family: {report.to_dict()}")
    return report
