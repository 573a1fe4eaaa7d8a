"""
Overlapping spaces

For a kernel M and a matrix function F, the pushforward kernel
M_F(l, z) = F(l) M(l, z) F(z)* and the multiplication map M_F : H(M) -> H(M_F),
computed on the span of kernel sections at sampled points. The kernel of
M_F is the overlapping space; its two worked instances identify the
complement of the canonical subspace D and the complement of the range of V.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg

from .colligation import BallPoint, OutputPair, resolvent_row, sample_points
from .config import SamplingConfig
from .exceptions import DegenerateGram, DimensionMismatch, NotPSD
from .kernels import (
    AmplifiedKernel,
    DirectSumKernel,
    IdentityKernel,
    Kernel,
    SchurEvaluator,
    SchurKernel,
)
from .numerics import (
    ComplexMatrix,
    Tolerances,
    adjoint,
    block_diagonal,
    coisometry_residual,
    isometry_residual,
    max_abs,
    operator_norm,
    orthonormal_basis,
    subspace_intersection_dim,
)
from .report import CheckOutcome, Report
from .subspaces import IsometryV, SubspaceBasis, build_V_and_check, domain_subspace, kernel_of_multiplier

logger = logging.getLogger(__name__)

_OVERLAP_STREAM = 9
_NORM_SAMPLES = 20


class Factor:
    """A matrix function F on the ball, mapping the block space of a kernel into C^rows."""

    name = "factor"

    def __init__(self, d: int, rows: int, cols: int):
        self.d = d
        self.rows = rows
        self.cols = cols

    def __call__(self, point: BallPoint) -> ComplexMatrix:
        raise NotImplementedError


class ZFactor(Factor):
    """F(l) = Z(l) = [l_1 I ... l_d I]."""

    name = "z"

    def __init__(self, d: int, dim: int):
        super().__init__(d, dim, d * dim)
        self.dim = dim

    def __call__(self, point: BallPoint) -> ComplexMatrix:
        return point.z_row(self.dim)


class RowFactor(Factor):
    """F(l) = [I_Y, S(l)]."""

    name = "row"

    def __init__(self, s: SchurEvaluator):
        super().__init__(s.d, s.dim_y, s.dim_y + s.dim_u)
        self.s = s

    def __call__(self, point: BallPoint) -> ComplexMatrix:
        return np.hstack([np.eye(self.rows, dtype=np.complex128), self.s(point)])


class ConstantFactor(Factor):
    """A constant matrix, e.g. the identity or zero."""

    name = "constant"

    def __init__(self, d: int, m: ComplexMatrix):
        m = np.asarray(m, dtype=np.complex128)
        super().__init__(d, int(m.shape[0]), int(m.shape[1]))
        self.m = m

    def __call__(self, point: BallPoint) -> ComplexMatrix:
        return self.m


class PushforwardKernel(Kernel):
    """M_F(l, z) = F(l) M(l, z) F(z)*."""

    name = "pushforward"

    def __init__(self, kernel: Kernel, factor: Factor):
        if factor.cols != kernel.block_size:
            raise DimensionMismatch(
                f"factor with {factor.cols} columns against a kernel with blocks of size {kernel.block_size}",
                blocks=["F", "M"],
            )
        super().__init__(kernel.d, factor.rows)
        self.kernel = kernel
        self.factor = factor

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return self.factor(lam) @ self.kernel(lam, zeta) @ adjoint(self.factor(zeta))


def pushforward_kernel(m: Kernel, f: Factor, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
    """Evaluate F(l) M(l, z) F(z)* at one pair of points."""
    return PushforwardKernel(m, f)(lam, zeta)


def _range_frame(gram: ComplexMatrix, tol: Tolerances, name: str) -> ComplexMatrix:
    """Coefficients E with E* G E = I spanning the range of a PSD Gram G."""
    if gram.size == 0:
        return np.zeros((gram.shape[0], 0), dtype=np.complex128)
    w, vecs = linalg.eigh((gram + adjoint(gram)) / 2)
    if w[0] < -tol.psd_tol:
        raise NotPSD(f"{name} Gram has eigenvalue {w[0]:.3e}", residual=float(-w[0]))
    keep = w > tol.cutoff(float(max(w[-1], 0.0)))
    return vecs[:, keep] / np.sqrt(w[keep])


@dataclass
class SampledRKHS:
    """
    The span of kernel sections M(., z_k) c_k, k over a point sample, and its pushforward.

    An element with coefficient vector c has norm^2 c* G c and values G c at
    the sample. frame and frame_f are orthonormal coordinates of the two spans.
    """

    points: list[BallPoint]
    kernel: Kernel
    factor: Factor
    gram: ComplexMatrix
    gram_f: ComplexMatrix
    phi: ComplexMatrix
    frame: ComplexMatrix
    frame_f: ComplexMatrix

    @classmethod
    def build(
        cls,
        kernel: Kernel,
        factor: Factor,
        points: Sequence[BallPoint],
        tol: Tolerances | None = None,
        threads: int = 1,
    ) -> SampledRKHS:
        """
        Assemble both Grams and the map Phi = diag(F(z_k)*) on coefficients.

        Raises:
            DimensionMismatch: F does not act on the blocks of M
            NotPSD: A Gram has an eigenvalue below -psd_tol
            DegenerateGram: The sections of M span nothing
        """
        tol = tol or Tolerances()
        points = list(points)
        pushed = PushforwardKernel(kernel, factor)
        gram = kernel.gram(points, threads)
        gram_f = pushed.gram(points, threads)
        phi = block_diagonal([adjoint(factor(p)) for p in points])
        frame = _range_frame(gram, tol, kernel.name)
        if frame.shape[1] == 0:
            raise DegenerateGram(f"{kernel.name} Gram has rank 0 on {len(points)} points")
        frame_f = _range_frame(gram_f, tol, pushed.name)
        logger.debug(f"sampled spans: dim H(M)={frame.shape[1]}, dim H(M_F)={frame_f.shape[1]}")
        return cls(list(points), kernel, factor, gram, gram_f, phi, frame, frame_f)

    @property
    def dim(self) -> int:
        return int(self.frame.shape[1])

    @property
    def dim_f(self) -> int:
        return int(self.frame_f.shape[1])

    def values(self, coords: ComplexMatrix) -> ComplexMatrix:
        """Values at the sample of the elements with the given orthonormal coordinates."""
        return self.gram @ self.frame @ coords

    def coords_of(self, coefficients: ComplexMatrix) -> ComplexMatrix:
        """Orthonormal coordinates of the elements with the given section coefficients."""
        return adjoint(self.frame) @ self.gram @ coefficients


@dataclass
class OverlapReport:
    """M_F on the sampled span, its kernel, and the identities it satisfies."""

    psi: ComplexMatrix
    multiplier: ComplexMatrix
    overlap_basis: ComplexMatrix
    gram_residual: float
    coisometry_residual: float
    gamma_unitarity: float
    lifted_norm_residual: float
    multiplication_residual: float
    tol: Tolerances = field(default_factory=Tolerances, repr=False)

    @property
    def overlap_dim(self) -> int:
        return int(self.overlap_basis.shape[1])

    @property
    def passed(self) -> bool:
        return max(
            self.coisometry_residual,
            self.gamma_unitarity,
            self.lifted_norm_residual,
            self.multiplication_residual,
        ) <= self.tol.eq_tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "overlap_dim": self.overlap_dim,
            "gram_residual": self.gram_residual,
            "coisometry_residual": self.coisometry_residual,
            "gamma_unitarity": self.gamma_unitarity,
            "lifted_norm_residual": self.lifted_norm_residual,
            "multiplication_residual": self.multiplication_residual,
        }


def coisometry_and_overlap(
    srk: SampledRKHS, tol: Tolerances | None = None, rng: np.random.Generator | None = None
) -> OverlapReport:
    """
    Represent M_F on the sampled span and compute its kernel.

    Psi sends M_F(., z) x to M(., z) F(z)* x; on coefficients it is Phi, and
    in orthonormal coordinates Psi = E* G Phi E'. Psi is an isometry and
    M_F = Psi* is a coisometry; the overlap is Ker M_F and
    Gamma = [M_F; N*] is unitary with N an orthonormal basis of the overlap.

    Args:
        srk: Sampled spans of M and M_F
        tol: Tolerances
        rng: Generator for the random elements of the norm checks

    Returns:
        OverlapReport
    """
    tol = tol or Tolerances()
    rng = rng or np.random.default_rng(0)

    scale = max(1.0, max_abs(srk.gram_f))
    gram_residual = max_abs(adjoint(srk.phi) @ srk.gram @ srk.phi - srk.gram_f) / scale

    psi = adjoint(srk.frame) @ srk.gram @ srk.phi @ srk.frame_f
    multiplier = adjoint(psi)
    coisometry = isometry_residual(psi) if psi.shape[1] else 0.0

    overlap = orthonormal_basis(multiplier, "kernel", tol) if multiplier.size else np.eye(srk.dim, dtype=np.complex128)
    gamma = np.vstack([multiplier, adjoint(overlap)])
    unitarity = max(isometry_residual(gamma), coisometry_residual(gamma))

    a = rng.standard_normal((srk.dim, _NORM_SAMPLES)) + 1j * rng.standard_normal((srk.dim, _NORM_SAMPLES))
    a /= np.linalg.norm(a, axis=0, keepdims=True)
    projected = a - overlap @ (adjoint(overlap) @ a)
    lifted = float(
        np.max(np.abs(np.linalg.norm(multiplier @ a, axis=0) - np.linalg.norm(projected, axis=0)))
    )

    # Values of F f at the sample against the values of M_F f.
    direct = adjoint(srk.phi) @ srk.gram @ srk.frame @ a
    pushed = srk.gram_f @ srk.frame_f @ (multiplier @ a)
    multiplication = operator_norm(direct - pushed) / max(1.0, operator_norm(direct))

    report = OverlapReport(
        psi=psi,
        multiplier=multiplier,
        overlap_basis=overlap,
        gram_residual=gram_residual,
        coisometry_residual=coisometry,
        gamma_unitarity=unitarity,
        lifted_norm_residual=lifted,
        multiplication_residual=multiplication,
        tol=tol,
    )
    logger.debug(f"overlap: {report.to_dict()}")
    return report


def example_e1(s: SchurEvaluator, d: int | None = None) -> tuple[Kernel, Factor]:
    """M = K_S on d copies, F(l) = Z(l): M_F(l, z) = sum_j l_j K_S(l, z) conj(z_j)."""
    d = s.d if d is None else d
    return AmplifiedKernel(SchurKernel(s), d), ZFactor(d, s.dim_y)


def example_e2(s: SchurEvaluator, dim_y: int | None = None, dim_u: int | None = None) -> tuple[Kernel, Factor]:
    """M = K_S + I_U, F(l) = [I, S(l)]: M_F(l, z) = K_S(l, z) + S(l) S(z)*."""
    dim_y = s.dim_y if dim_y is None else dim_y
    dim_u = s.dim_u if dim_u is None else dim_u
    if (dim_y, dim_u) != (s.dim_y, s.dim_u):
        raise DimensionMismatch(f"S is {s.dim_y} x {s.dim_u}, not {dim_y} x {dim_u}", blocks=["S"])
    return DirectSumKernel(SchurKernel(s), IdentityKernel(s.d, dim_u)), RowFactor(s)


def complement_witness_values(p: OutputPair, vectors: ComplexMatrix, points: Sequence[BallPoint]) -> ComplexMatrix:
    """Values [(O h_1)(z); ...; (O h_d)(z)] over the sample for h in the columns of vectors."""
    blocks = []
    for point in points:
        row = resolvent_row(p, point)
        blocks.append(np.vstack([row @ vectors[j * p.dim_x:(j + 1) * p.dim_x] for j in range(p.d)]))
    return np.vstack(blocks)


def range_complement_witness_values(
    p: OutputPair, vectors: ComplexMatrix, points: Sequence[BallPoint]
) -> ComplexMatrix:
    """Values [(O x)(z); u] over the sample for (x, u) in the columns of vectors."""
    x, u = vectors[: p.dim_x], vectors[p.dim_x:]
    return np.vstack([np.vstack([resolvent_row(p, point) @ x, u]) for point in points])


def align_with_witness(values: ComplexMatrix, witness: ComplexMatrix, tol: Tolerances) -> tuple[bool, int]:
    """
    Compare two families of functions through their values at the sample.

    Returns:
        Tuple of (same span, dimension of the common part)
    """
    q1 = orthonormal_basis(values, "range", tol)
    q2 = orthonormal_basis(witness, "range", tol)
    common = subspace_intersection_dim(q1, q2, tol)
    return q1.shape[1] == q2.shape[1] == common, common


def input_intersection_dim(srk: SampledRKHS, overlap: OverlapReport, dim_y: int, dim_u: int, tol: Tolerances) -> int:
    """Dimension of the overlap intersected with {0} + U, for the K_S + I_U construction."""
    block = dim_y + dim_u
    selector = np.zeros((srk.gram.shape[0], dim_u), dtype=np.complex128)
    selector[dim_y:block] = np.eye(dim_u)
    constants = orthonormal_basis(srk.coords_of(selector), "range", tol)
    return subspace_intersection_dim(constants, overlap.overlap_basis, tol)


def overlap_demo(
    s: SchurEvaluator,
    p: OutputPair,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> Report:
    """
    Run both worked overlap constructions for S and a pair with the same kernel.

    The first overlap is matched with the complement of D, the second with
    the complement of the range of V, and its intersection with {0} + U
    with U0.
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    report = Report("overlap-demo", settings={"tolerances": tol.to_dict(), "sampling": cfg.to_dict()})
    points = sample_points(s.d, cfg, _OVERLAP_STREAM)

    def first() -> CheckOutcome:
        kernel, factor = example_e1(s)
        srk = SampledRKHS.build(kernel, factor, points, tol, cfg.threads)
        result = coisometry_and_overlap(srk, tol, cfg.generator(_OVERLAP_STREAM))
        dsub: SubspaceBasis = domain_subspace(p, cfg, tol)
        witness = complement_witness_values(p, dsub.complement, points)
        aligned, _ = align_with_witness(srk.values(result.overlap_basis), witness, tol)
        details = {**result.to_dict(), "dim_D_perp": dsub.complement_dim, "aligned": aligned}
        passed = result.passed and result.overlap_dim == dsub.complement_dim and aligned
        return passed, result.coisometry_residual, details

    def second() -> CheckOutcome:
        kernel, factor = example_e2(s)
        srk = SampledRKHS.build(kernel, factor, points, tol, cfg.threads)
        result = coisometry_and_overlap(srk, tol, cfg.generator(_OVERLAP_STREAM))
        v: IsometryV = build_V_and_check(s, p, domain_subspace(p, cfg, tol), cfg, tol)
        witness = range_complement_witness_values(p, v.range_space.complement, points)
        aligned, _ = align_with_witness(srk.values(result.overlap_basis), witness, tol)
        u0 = kernel_of_multiplier(s, cfg, tol)
        common = input_intersection_dim(srk, result, s.dim_y, s.dim_u, tol)
        details = {
            **result.to_dict(),
            "dim_range_complement": v.range_space.complement_dim,
            "aligned": aligned,
            "input_intersection_dim": common,
            "dim_U0": u0.dim,
        }
        passed = result.passed and aligned and common == u0.dim
        return passed, result.coisometry_residual, details

    report.record("overlap_e1", first)
    report.record("overlap_e2", second)
    return report
