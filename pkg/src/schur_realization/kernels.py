"""
Kernels

Evaluators for Schur-class functions and for the Szego, de Branges-Rovnyak
and output-pair kernels. Provides the defect identity linking K_S to
K_{C,A}, positivity and equality certificates on finite samples, and the
Taylor coefficients of the observability operator.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from scipy import linalg

from .colligation import (
    BallPoint,
    Colligation,
    OutputPair,
    check_distinct,
    classify_colligation,
    evaluate_many,
    resolvent_row,
    transfer_eval,
    transfer_eval_adjoint,
)
from .exceptions import DimensionMismatch, NotContractive, SingularDenominator
from .numerics import ComplexMatrix, Tolerances, adjoint, max_abs, operator_norm

logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]

_DENOMINATOR_FLOOR = 1e-14


class SchurEvaluator:
    """
    A source of values S(lambda), from a colligation or from a closed form.

    S(0) is computed once and cached.
    """

    def __init__(
        self,
        fn: Callable[[BallPoint], Any],
        d: int,
        dim_y: int,
        dim_u: int,
        colligation: Colligation | None = None,
        label: str = "function",
    ):
        """
        Initialize the evaluator.

        Args:
            fn: Function returning S(lambda) as a dimY x dimU array
            d: Number of variables
            dim_y: Output dimension
            dim_u: Input dimension
            colligation: Realization of S, when known
            label: Short description used in reports
        """
        self._fn = fn
        self.d = d
        self.dim_y = dim_y
        self.dim_u = dim_u
        self.colligation = colligation
        self.label = label

    @classmethod
    def from_colligation(cls, c: Colligation) -> SchurEvaluator:
        return cls(
            lambda p: transfer_eval(c, p), c.d, c.dim_y, c.dim_u, colligation=c, label="colligation"
        )

    @classmethod
    def from_function(
        cls, fn: Callable[[BallPoint], Any], d: int, dim_y: int, dim_u: int, label: str = "function"
    ) -> SchurEvaluator:
        return cls(fn, d, dim_y, dim_u, label=label)

    def __call__(self, point: BallPoint) -> ComplexMatrix:
        if point.d != self.d:
            raise DimensionMismatch(f"point of dimension {point.d} for a function of {self.d} variables")
        value = np.asarray(self._fn(point), dtype=np.complex128).reshape(self.dim_y, self.dim_u)
        return value

    def adjoint(self, point: BallPoint) -> ComplexMatrix:
        """Return S(zeta)*, in adjoint form when a realization is known."""
        if self.colligation is not None:
            return transfer_eval_adjoint(self.colligation, point)
        return adjoint(self(point))

    @cached_property
    def at_origin(self) -> ComplexMatrix:
        """S(0)."""
        return self(BallPoint.origin(self.d))

    def values(self, points: Sequence[BallPoint], threads: int = 1) -> list[ComplexMatrix]:
        """Evaluate at every point, in input order."""
        return evaluate_many(self, points, threads)

    def compose_right(self, w: ComplexMatrix, label: str | None = None) -> SchurEvaluator:
        """
        Return the function lambda -> S(lambda) W.

        Args:
            w: Matrix from a new input space into the input space of S
            label: Description of the new function
        """
        if w.shape[0] != self.dim_u:
            raise DimensionMismatch(f"W has {w.shape[0]} rows, expected {self.dim_u}", blocks=["W"])
        realization = None
        if self.colligation is not None:
            c = self.colligation
            realization = Colligation(c.A, tuple(b @ w for b in c.B), c.C, c.D @ w)
        return SchurEvaluator(
            lambda p: self(p) @ w,
            self.d,
            self.dim_y,
            int(w.shape[1]),
            colligation=realization,
            label=label or f"{self.label}*W",
        )

    def taylor_coefficients(self, degree: int) -> dict[MultiIndex, ComplexMatrix] | None:
        """
        Taylor coefficients S_alpha for |alpha| <= degree, or None without a realization.

        S_0 = D and S_alpha = sum_j C A^(alpha - e_j) B_j for |alpha| >= 1.
        """
        c = self.colligation
        if c is None:
            return None
        coefficients: dict[MultiIndex, ComplexMatrix] = {(0,) * c.d: np.array(c.D)}
        if degree < 1:
            return coefficients
        for n, level in iter_taylor_degrees(c.pair, degree - 1):
            for alpha in multi_indices(c.d, n + 1):
                total = np.zeros((c.dim_y, c.dim_u), dtype=np.complex128)
                for j in range(c.d):
                    if alpha[j]:
                        total += adjoint(level[_lower(alpha, j)]) @ c.B[j]
                coefficients[alpha] = total
        return coefficients


class Kernel:
    """A matrix-valued kernel on the ball with square blocks of size block_size."""

    name = "kernel"

    def __init__(self, d: int, block_size: int):
        self.d = d
        self.block_size = block_size

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        raise NotImplementedError

    def gram(self, points: Sequence[BallPoint], threads: int = 1) -> ComplexMatrix:
        """Block Gram matrix with (i, j) block K(points[i], points[j])."""
        rows = evaluate_many(lambda p: np.hstack([self(p, q) for q in points]), points, threads)
        return np.vstack(rows)


def _szego_denominator(lam: BallPoint, zeta: BallPoint) -> complex:
    denominator = 1.0 - lam.inner(zeta)
    if abs(denominator) <= _DENOMINATOR_FLOOR:
        raise SingularDenominator(f"1 - <lambda, zeta> vanishes at {lam.coords}, {zeta.coords}")
    return denominator


class SzegoKernel(Kernel):
    """k_d(lambda, zeta) = 1 / (1 - <lambda, zeta>)."""

    name = "szego"

    def __init__(self, d: int):
        super().__init__(d, 1)

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return np.array([[1.0 / _szego_denominator(lam, zeta)]], dtype=np.complex128)


class SchurKernel(Kernel):
    """K_S(lambda, zeta) = (I - S(lambda) S(zeta)*) / (1 - <lambda, zeta>)."""

    name = "schur"

    def __init__(self, s: SchurEvaluator):
        super().__init__(s.d, s.dim_y)
        self.s = s

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        numerator = np.eye(self.block_size) - self.s(lam) @ adjoint(self.s(zeta))
        return numerator / _szego_denominator(lam, zeta)

    def gram(self, points: Sequence[BallPoint], threads: int = 1) -> ComplexMatrix:
        values = self.s.values(points, threads)
        b = self.block_size
        out = np.empty((len(points) * b, len(points) * b), dtype=np.complex128)
        for i, (p, sp) in enumerate(zip(points, values)):
            for j, (q, sq) in enumerate(zip(points, values)):
                block = (np.eye(b) - sp @ adjoint(sq)) / _szego_denominator(p, q)
                out[i * b:(i + 1) * b, j * b:(j + 1) * b] = block
        return out


class PairKernel(Kernel):
    """K_{C,A}(lambda, zeta) = C (I - Z(lambda)A)^-1 (I - A* Z(zeta)*)^-1 C*."""

    name = "pair"

    def __init__(self, p: OutputPair):
        super().__init__(p.d, p.dim_y)
        self.pair = p

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return resolvent_row(self.pair, lam) @ adjoint(resolvent_row(self.pair, zeta))

    def gram(self, points: Sequence[BallPoint], threads: int = 1) -> ComplexMatrix:
        rows = evaluate_many(lambda p: resolvent_row(self.pair, p), points, threads)
        stacked = np.vstack(rows)
        return stacked @ adjoint(stacked)


class IdentityKernel(Kernel):
    """The constant kernel I; its space is the constant functions."""

    name = "identity"

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return np.eye(self.block_size, dtype=np.complex128)


class DirectSumKernel(Kernel):
    """Block-diagonal kernel diag(K_1, ..., K_r)."""

    name = "direct_sum"

    def __init__(self, *parts: Kernel):
        if not parts:
            raise DimensionMismatch("direct sum of no kernels")
        super().__init__(parts[0].d, sum(k.block_size for k in parts))
        self.parts = parts

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return linalg.block_diag(*[k(lam, zeta) for k in self.parts])


class AmplifiedKernel(Kernel):
    """K tensor I_copies, ordered as copies stacked one after another."""

    name = "amplified"

    def __init__(self, kernel: Kernel, copies: int):
        super().__init__(kernel.d, kernel.block_size * copies)
        self.kernel = kernel
        self.copies = copies

    def __call__(self, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
        return np.kron(np.eye(self.copies), self.kernel(lam, zeta))


def eval_kernel(kernel: Kernel, lam: BallPoint, zeta: BallPoint) -> ComplexMatrix:
    """Evaluate a kernel at (lambda, zeta)."""
    if lam.d != kernel.d or zeta.d != kernel.d:
        raise DimensionMismatch(f"points of dimension {lam.d}, {zeta.d} for a kernel on C^{kernel.d}")
    return kernel(lam, zeta)


def defect_identity_terms(
    c: Colligation, lam: BallPoint, zeta: BallPoint
) -> tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    """
    The three terms of K_S = K_{C,A} + (defect term).

    Returns:
        Tuple of (K_S, K_{C,A}, defect term) at (lambda, zeta), where the
        defect term is [C (I - Z(lambda)A)^-1 Z(lambda), I] (I - UU*) [...]* / (1 - <lambda, zeta>)
    """
    s = SchurEvaluator.from_colligation(c)
    k_s = SchurKernel(s)(lam, zeta)

    row_l = resolvent_row(c.pair, lam)
    row_z = resolvent_row(c.pair, zeta)
    k_ca = row_l @ adjoint(row_z)

    eye_y = np.eye(c.dim_y)
    left = np.hstack([row_l @ lam.z_row(c.dim_x), eye_y])
    right = np.vstack([adjoint(zeta.z_row(c.dim_x)) @ adjoint(row_z), eye_y])
    u = c.matrix
    defect = np.eye(u.shape[0]) - u @ adjoint(u)
    term = left @ defect @ right / _szego_denominator(lam, zeta)
    return k_s, k_ca, term


def defect_identity_residual(
    c: Colligation, lam: BallPoint, zeta: BallPoint, tol: Tolerances | None = None
) -> float:
    """
    Residual of the identity K_S = K_{C,A} + defect term, both sides assembled.

    Raises:
        NotContractive: The colligation is not a contraction
    """
    tol = tol or Tolerances()
    record = classify_colligation(c, tol)
    if not record.contractive:
        raise NotContractive(f"colligation has norm {record.norm:.6f}", residual=record.norm - 1.0)
    k_s, k_ca, term = defect_identity_terms(c, lam, zeta)
    return operator_norm(k_s - k_ca - term)


@dataclass
class KernelSample:
    """A block Gram matrix on a list of points."""

    points: list[BallPoint]
    gram: ComplexMatrix
    block_size: int

    @property
    def hermitian_residual(self) -> float:
        return max_abs(self.gram - adjoint(self.gram))


@dataclass
class GramCertificate:
    """Positivity and (optionally) equality certificate for a sampled kernel."""

    psd: bool
    min_eig: float
    max_diff: float | None
    sample: KernelSample

    def to_dict(self) -> dict[str, Any]:
        return {
            "psd": self.psd,
            "min_eig": self.min_eig,
            "max_diff": self.max_diff,
            "points": len(self.sample.points),
            "hermitian_residual": self.sample.hermitian_residual,
        }


def gram_certify(
    k1: Kernel,
    points: Sequence[BallPoint],
    tol: Tolerances | None = None,
    k2: Kernel | None = None,
    threads: int = 1,
) -> GramCertificate:
    """
    Certify positivity of k1, and equality with k2, on a finite sample.

    Args:
        k1: Kernel to certify
        points: Pairwise distinct points
        tol: Tolerances
        k2: Optional second kernel compared entrywise with k1
        threads: Worker thread bound for Gram assembly

    Returns:
        GramCertificate

    Raises:
        DuplicatePoints: Two points coincide
    """
    tol = tol or Tolerances()
    points = list(points)
    if not points:
        raise DimensionMismatch("gram_certify needs at least one point")
    check_distinct(points)

    gram = k1.gram(points, threads)
    sample = KernelSample(points, gram, k1.block_size)
    eigenvalues = linalg.eigvalsh((gram + adjoint(gram)) / 2)
    min_eig = float(eigenvalues[0])
    psd = min_eig >= -tol.psd_tol

    max_diff = None
    if k2 is not None:
        if k2.block_size != k1.block_size:
            raise DimensionMismatch(f"kernels with blocks {k1.block_size} and {k2.block_size}")
        max_diff = max_abs(gram - k2.gram(points, threads))

    logger.debug(f"gram_certify({k1.name}): n={len(points)}, min_eig={min_eig:.3e}, max_diff={max_diff}")
    return GramCertificate(psd=psd, min_eig=min_eig, max_diff=max_diff, sample=sample)


def multi_indices(d: int, degree: int) -> Iterator[MultiIndex]:
    """Multi-indices of total degree exactly `degree` in d variables, in a fixed order."""
    for combo in itertools.combinations_with_replacement(range(d), degree):
        alpha = [0] * d
        for j in combo:
            alpha[j] += 1
        yield tuple(alpha)


def _lower(alpha: MultiIndex, j: int) -> MultiIndex:
    return alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]


def iter_taylor_degrees(p: OutputPair, max_degree: int) -> Iterator[tuple[int, dict[MultiIndex, ComplexMatrix]]]:
    """
    Yield (n, {beta: c_beta}) for n = 0..max_degree, one total degree at a time.

    c_0 = C* and c_beta = sum_j A_j* c_(beta - e_j); c_beta* is the Taylor
    coefficient of lambda^beta in C (I - Z(lambda)A)^-1.
    """
    zero: MultiIndex = (0,) * p.d
    level: dict[MultiIndex, ComplexMatrix] = {zero: adjoint(p.C)}
    yield 0, level
    a_star = [adjoint(a) for a in p.A.blocks]
    for n in range(1, max_degree + 1):
        nxt: dict[MultiIndex, ComplexMatrix] = {}
        for beta in multi_indices(p.d, n):
            total = np.zeros((p.dim_x, p.dim_y), dtype=np.complex128)
            for j in range(p.d):
                if beta[j]:
                    total += a_star[j] @ level[_lower(beta, j)]
            nxt[beta] = total
        level = nxt
        yield n, level


def taylor_coefficients(p: OutputPair, degree: int) -> dict[MultiIndex, ComplexMatrix]:
    """All c_beta with |beta| <= degree, keyed by multi-index."""
    coefficients: dict[MultiIndex, ComplexMatrix] = {}
    for _, level in iter_taylor_degrees(p, degree):
        coefficients.update(level)
    return coefficients
