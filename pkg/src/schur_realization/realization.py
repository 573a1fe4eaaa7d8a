"""
Realization

High-level workflows built on the colligation, kernel, subspace and
completion layers:

- coisometric realization of a contractive pair by pivoted Cholesky
- realization of a given Schur function with a prescribed output pair
- enumeration of the Schur functions whose kernel is K_{C,A}
- Gleason, observability and unitary-equivalence checks
- transport of a colligation to its functional model
- the regression suite for the two-variable worked example
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from scipy import linalg

from .colligation import (
    BallPoint,
    Colligation,
    OperatorTuple,
    OutputPair,
    classify_colligation,
    classify_pair,
    observe,
    resolvent_row,
    sample_points,
    solve_intertwiner,
    transfer_eval,
    unitarily_equivalent_colligations,
)
from .completion import (
    CompletionBlocks,
    CompletionParameter,
    build_blocks,
    check_completion,
    classify_family,
    parrott_complete,
)
from .config import SamplingConfig
from .exceptions import DimUTooSmall, KernelMismatch, NotContractivePair, ParameterShapeMismatch
from .kernels import GramCertificate, PairKernel, SchurEvaluator, SchurKernel, gram_certify, taylor_coefficients
from .numerics import (
    ComplexMatrix,
    Tolerances,
    adjoint,
    isometry_residual,
    max_abs,
    operator_norm,
    orthonormal_basis,
    pivoted_cholesky,
    psd_sqrt_and_defect,
    solve_least_squares,
    subspace_intersection_dim,
)
from .report import CheckOutcome, Report
from .subspaces import SubspaceBasis, build_V_and_check, domain_subspace, kernel_of_multiplier
from .worked_examples import (
    CONTRACTIVITY_THRESHOLD,
    example_closed_form,
    example_colligation,
    example_complement_witness,
    example_degenerate_direction,
    example_pair,
    example_resolvent_row,
    example_schur,
)

logger = logging.getLogger(__name__)

_KERNEL_STREAM = 5
_GLEASON_STREAM = 6
_MODEL_STREAM = 7
_REPRESENTER_STREAM = 8


def realize_from_pair_cholesky(p: OutputPair, dim_u: int, tol: Tolerances | None = None) -> Colligation:
    """
    Coisometric colligation with output pair (C, A).

    [B; D] is the pivoted Cholesky factor of I - [A; C][A; C]*, padded
    with zero columns up to dim_u.

    Args:
        p: Contractive output pair
        dim_u: Input dimension of the realization
        tol: Tolerances

    Returns:
        Coisometric Colligation

    Raises:
        NotContractivePair: The pair is not contractive
        DimUTooSmall: dim_u is below the rank of the defect
    """
    tol = tol or Tolerances()
    pair_class = classify_pair(p, tol)
    if not pair_class.contractive_pair:
        raise NotContractivePair(
            f"pair defect has eigenvalue {pair_class.min_eigenvalue:.3e}",
            residual=-pair_class.min_eigenvalue,
        )
    stacked = p.stacked
    defect = np.eye(stacked.shape[0]) - stacked @ adjoint(stacked)
    factor, _, rank = pivoted_cholesky(defect, tol)
    if dim_u < rank:
        raise DimUTooSmall(f"input dimension {dim_u} below defect rank {rank}", expected=rank, actual=dim_u)

    padded = np.zeros((stacked.shape[0], dim_u), dtype=np.complex128)
    padded[:, :rank] = factor
    split = p.d * p.dim_x
    b_blocks = tuple(padded[j * p.dim_x:(j + 1) * p.dim_x] for j in range(p.d))
    logger.debug(f"Cholesky realization: defect rank {rank}, dimU {dim_u}")
    return Colligation(p.A, b_blocks, p.C, padded[split:])


def certify_kernels(
    s: SchurEvaluator,
    p: OutputPair,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> GramCertificate:
    """
    Compare K_S with K_{C,A} on a seeded sample.

    Raises:
        KernelMismatch: The Grams differ by more than eq_tol relative to their size
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    points = sample_points(p.d, cfg, _KERNEL_STREAM)
    certificate = gram_certify(SchurKernel(s), points, tol, k2=PairKernel(p), threads=cfg.threads)
    scale = max(1.0, max_abs(certificate.sample.gram))
    if certificate.max_diff is None or certificate.max_diff > tol.eq_tol * scale:
        raise KernelMismatch(
            f"K_S and K_C,A differ by {certificate.max_diff:.3e} on the sample",
            residual=certificate.max_diff,
        )
    return certificate


def completion_pipeline(
    s: SchurEvaluator,
    p: OutputPair,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> CompletionBlocks:
    """Kernel certificate, canonical subspace, V and the completion blocks for (s, p)."""
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    if s.d != p.d or s.dim_y != p.dim_y:
        raise KernelMismatch(f"function on C^{s.d} into C^{s.dim_y}, pair on C^{p.d} into C^{p.dim_y}")
    certify_kernels(s, p, cfg, tol)
    dsub = domain_subspace(p, cfg, tol)
    v = build_V_and_check(s, p, dsub, cfg, tol)
    return build_blocks(s, p, v, dsub, cfg, tol)


def realize_with_pair(
    s: SchurEvaluator,
    p: OutputPair,
    q: CompletionParameter | None = None,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> Colligation:
    """
    Realize S with the prescribed output pair (C, A).

    Args:
        s: Schur function with K_S = K_{C,A}
        p: Output pair
        q: Completion parameter (the central completion when omitted)
        cfg: Sampling settings
        tol: Tolerances

    Returns:
        Weakly coisometric Colligation [A B; C S(0)] with transfer function S

    Raises:
        KernelMismatch: K_S and K_{C,A} differ on the sample
    """
    blocks = completion_pipeline(s, p, cfg, tol)
    return parrott_complete(blocks, q).colligation


@dataclass
class Representer:
    """A Schur function with K_S = K_{C,A}, with the data it was built from."""

    schur: SchurEvaluator
    dsub: SubspaceBasis
    t: ComplexMatrix
    defect: ComplexMatrix
    minimal_dim_u: int
    g: ComplexMatrix
    t_tilde: ComplexMatrix
    formula_residual: float
    certificate: GramCertificate

    @property
    def colligation(self) -> Colligation:
        assert self.schur.colligation is not None
        return self.schur.colligation

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_u": self.schur.dim_u,
            "minimal_dim_u": self.minimal_dim_u,
            "formula_residual": self.formula_residual,
            "kernel_max_diff": self.certificate.max_diff,
            "psd": self.certificate.psd,
        }


def _representer_value(
    p: OutputPair, basis: ComplexMatrix, t_tilde: ComplexMatrix, point: BallPoint
) -> ComplexMatrix:
    """[C (I - Z A)^-1 Z on D, I] T~* at one point."""
    row = resolvent_row(p, point) @ point.z_row(p.dim_x) @ basis
    return np.hstack([row, np.eye(p.dim_y)]) @ adjoint(t_tilde)


def enumerate_representers(
    p: OutputPair,
    dim_u: int,
    g: ComplexMatrix | None = None,
    cfg: SamplingConfig | None = None,
    tol: Tolerances | None = None,
) -> Representer:
    """
    Build the Schur function S(l) = [C (I - Z(l)A)^-1 Z(l) on D, I] (I - T*T)^(1/2) G*.

    T = [A* on D, C*]. Every representer with kernel K_{C,A} arises this
    way for some isometry G from Ran (I - T*T)^(1/2) into C^dim_u.

    Args:
        p: Contractive output pair
        dim_u: Input dimension
        g: Isometry of shape (dim_u, rank); defaults to [I; 0]
        cfg: Sampling settings
        tol: Tolerances

    Returns:
        Representer whose schur carries a realization

    Raises:
        DimUTooSmall: dim_u is below rank (I - T*T)^(1/2)
        ParameterShapeMismatch: G has the wrong shape or is not isometric
        KernelMismatch: The sampled kernels differ
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    dsub = domain_subspace(p, cfg, tol)
    basis = dsub.basis
    t = np.hstack([p.A.adjoint_row @ basis, adjoint(p.C)])
    defect, rank = psd_sqrt_and_defect(np.eye(t.shape[1]) - adjoint(t) @ t, tol)
    if dim_u < rank:
        raise DimUTooSmall(f"input dimension {dim_u} below minimal {rank}", expected=rank, actual=dim_u)

    if g is None:
        g = np.eye(dim_u, rank, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (dim_u, rank):
        raise ParameterShapeMismatch(f"G has shape {g.shape}, expected {(dim_u, rank)}")
    if rank and isometry_residual(g) > tol.eq_tol:
        raise ParameterShapeMismatch("G is not an isometry", residual=isometry_residual(g))

    defect_range = orthonormal_basis(defect, "range", tol)
    t_tilde = g @ adjoint(defect_range) @ defect

    k = basis.shape[1]
    b_stacked = basis @ adjoint(t_tilde[:, :k])
    b_blocks = tuple(b_stacked[j * p.dim_x:(j + 1) * p.dim_x] for j in range(p.d))
    realization = Colligation(p.A, b_blocks, p.C, adjoint(t_tilde[:, k:]))
    schur = SchurEvaluator.from_colligation(realization)

    points = sample_points(p.d, cfg, _REPRESENTER_STREAM)
    formula_residual = 0.0
    for point in points:
        direct = _representer_value(p, basis, t_tilde, point)
        generator = adjoint(point.z_row(p.dim_x)) @ adjoint(resolvent_row(p, point))
        states = np.vstack([adjoint(basis) @ generator, np.eye(p.dim_y)])
        formula_residual = max(
            formula_residual,
            operator_norm(schur(point) - direct),
            operator_norm(schur.adjoint(point) - t_tilde @ states),
        )

    certificate = gram_certify(SchurKernel(schur), points, tol, k2=PairKernel(p), threads=cfg.threads)
    scale = max(1.0, max_abs(certificate.sample.gram))
    if certificate.max_diff is None or certificate.max_diff > tol.eq_tol * scale:
        raise KernelMismatch(
            f"representer kernel differs from K_C,A by {certificate.max_diff:.3e}",
            residual=certificate.max_diff,
        )
    logger.debug(f"representer: minimal dimU {rank}, formula residual {formula_residual:.3e}")
    return Representer(
        schur=schur,
        dsub=dsub,
        t=t,
        defect=defect,
        minimal_dim_u=rank,
        g=g,
        t_tilde=t_tilde,
        formula_residual=formula_residual,
        certificate=certificate,
    )


def right_unitary_factor(
    s1: SchurEvaluator, s2: SchurEvaluator, points: list[BallPoint], tol: Tolerances | None = None
) -> tuple[ComplexMatrix, float, float]:
    """
    Constant W with S1(l) = S2(l) W at every point, by least squares.

    Returns:
        Tuple of (W, relative residual, ||W*W - I||)
    """
    tol = tol or Tolerances()
    lhs = np.vstack(s2.values(points))
    rhs = np.vstack(s1.values(points))
    w, residual = solve_least_squares(lhs, rhs, tol)
    unitarity = isometry_residual(w) if w.shape[0] == w.shape[1] else float("inf")
    return w, residual, unitarity


@dataclass
class ObservabilityData:
    """
    Taylor coefficients of the observability map and the lifted metric.

    stacked holds the coefficients c_beta* (each dimY x dimX) one under the
    other in graded order; gram is the projection onto (Ker O)-perp, so that
    ||O x|| in H(K_{C,A}) equals ||gram x||.
    """

    pair: OutputPair
    degree: int
    coefficients: dict[tuple[int, ...], ComplexMatrix]
    stacked: ComplexMatrix
    kernel: ComplexMatrix
    gram: ComplexMatrix

    @property
    def observable(self) -> bool:
        return self.kernel.shape[1] == 0

    def to_dict(self) -> dict[str, Any]:
        return {"degree": self.degree, "observable": self.observable, "kernel_dim": self.kernel.shape[1]}


def observability_data(p: OutputPair, degree: int | None = None, tol: Tolerances | None = None) -> ObservabilityData:
    """
    Coefficients of x -> C (I - Z(l)A)^-1 x up to total degree `degree` (default dimX).

    Degree dimX suffices: the spans of words in A of growing length stop
    growing within dimX steps.
    """
    tol = tol or Tolerances()
    degree = max(p.dim_x, 1) if degree is None else degree
    coefficients = taylor_coefficients(p, degree)
    keys = sorted(coefficients, key=lambda beta: (sum(beta), beta))
    stacked = np.vstack([adjoint(coefficients[beta]) for beta in keys])
    kernel = orthonormal_basis(stacked, "kernel", tol)
    gram = np.eye(p.dim_x, dtype=np.complex128) - kernel @ adjoint(kernel)
    return ObservabilityData(p, degree, coefficients, stacked, kernel, gram)


def observability_gram(p: OutputPair, degree: int | None = None, tol: Tolerances | None = None) -> ComplexMatrix:
    """Gram of the lifted metric on X: the projection onto (Ker O)-perp."""
    return observability_data(p, degree, tol).gram


@dataclass
class EquivalenceReport:
    """Observability of two pairs and whether a unitary intertwines them."""

    observable1: bool
    observable2: bool
    equivalent: bool
    witness: ComplexMatrix | None
    residual: float
    unitarity: float
    kernels_equal: bool
    gram_isometry_residual: float | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "observable1": self.observable1,
            "observable2": self.observable2,
            "equivalent": self.equivalent,
            "witness": self.witness,
            "residual": self.residual,
            "unitarity": self.unitarity,
            "kernels_equal": self.kernels_equal,
            "gram_isometry_residual": self.gram_isometry_residual,
        }


def observability_and_equivalence(
    p1: OutputPair, p2: OutputPair, tol: Tolerances | None = None
) -> EquivalenceReport:
    """
    Decide observability of both pairs and unitary equivalence between them.

    Equivalence asks for an intertwiner U with C2 U = C1 and U A1_j = A2_j U,
    accepted iff the residual and ||U*U - I|| are within eq_tol. Pairs that
    are not observable have many intertwiners; a unitary one is searched for
    among all of them. When both pairs are observable with the same kernel, the
    isometry W with O2 W = O1 is reported as well; it need not intertwine
    the state operators.
    """
    tol = tol or Tolerances()
    for label, pair in (("first", p1), ("second", p2)):
        if not classify_pair(pair, tol).contractive_pair:
            logger.warning(f"{label} pair is not contractive")

    if p1.d != p2.d or p1.dim_y != p2.dim_y:
        obs1, obs2 = observability_data(p1, tol=tol), observability_data(p2, tol=tol)
        return EquivalenceReport(
            obs1.observable, obs2.observable, False, None, float("inf"), float("inf"), False, None
        )

    degree = p1.dim_x + p2.dim_x
    obs1 = observability_data(p1, degree, tol)
    obs2 = observability_data(p2, degree, tol)
    kernel_gap = max_abs(obs1.stacked @ adjoint(obs1.stacked) - obs2.stacked @ adjoint(obs2.stacked))
    kernels_equal = kernel_gap <= tol.eq_tol

    gram_isometry = None
    if obs1.observable and obs2.observable and kernels_equal:
        w, _ = solve_least_squares(obs2.stacked, obs1.stacked, tol)
        gram_isometry = isometry_residual(w)

    u, residual, unitarity = solve_intertwiner(p1, p2, tol)
    equivalent = u is not None and residual <= tol.eq_tol and unitarity <= tol.eq_tol
    logger.debug(f"pair equivalence: residual={residual:.3e}, unitarity={unitarity:.3e}")
    return EquivalenceReport(
        observable1=obs1.observable,
        observable2=obs2.observable,
        equivalent=equivalent,
        witness=u if equivalent else None,
        residual=residual,
        unitarity=unitarity,
        kernels_equal=kernels_equal,
        gram_isometry_residual=gram_isometry,
    )


@dataclass
class FunctionalModel:
    """A colligation transported to coordinates of kernel sections."""

    colligation: Colligation
    coordinates: ComplexMatrix
    observable: bool
    evaluation_residual: float
    equivalent: bool
    witness: ComplexMatrix | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_x": self.colligation.dim_x,
            "observable": self.observable,
            "evaluation_residual": self.evaluation_residual,
            "equivalent": self.equivalent,
        }


def functional_model(
    c: Colligation, cfg: SamplingConfig | None = None, tol: Tolerances | None = None
) -> FunctionalModel:
    """
    Move a colligation onto the span of the sections K_{C,A}(., zeta) y.

    With Ostack the rows C (I - Z(zeta_l)A)^-1 stacked over the sample,
    G = Ostack Ostack* is the Gram of the sections. With Ostack = U S W*,
    E = U S^-1 is an orthonormal frame of their span in the Gram metric.
    J = E* Ostack carries states to section coordinates, isometrically on
    (Ker O)-perp, and the model is
    (J A_j J*, J B_j, C J*, D). C of the model evaluates sections at 0.
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    p = c.pair
    points = sample_points(c.d, cfg, _MODEL_STREAM)
    ostack = np.vstack([resolvent_row(p, point) for point in points])
    gram = ostack @ adjoint(ostack)
    if ostack.size:
        u, sigma, _ = linalg.svd(ostack, full_matrices=False)
        keep = sigma > tol.cutoff(float(sigma[0]))
        frame = u[:, keep] / sigma[keep]
    else:
        frame = np.zeros((ostack.shape[0], 0), dtype=np.complex128)
    j = adjoint(frame) @ ostack

    observable = j.shape[0] == c.dim_x
    if not observable:
        logger.warning(f"functional model: sections span {j.shape[0]} of {c.dim_x} state dimensions")

    model = Colligation(
        OperatorTuple(tuple(j @ a @ adjoint(j) for a in c.A.blocks)),
        tuple(j @ b for b in c.B),
        c.C @ adjoint(j),
        c.D,
    )
    evaluation = model.C @ adjoint(frame) @ gram - c.C @ adjoint(ostack)
    equivalent, witness = unitarily_equivalent_colligations(c, model, tol)
    return FunctionalModel(
        colligation=model,
        coordinates=j,
        observable=observable,
        evaluation_residual=operator_norm(evaluation),
        equivalent=equivalent,
        witness=witness,
    )


@dataclass
class GleasonReport:
    """Gleason identity, contractivity and canonical-section checks for a pair."""

    dop1_residual: float
    contractive: bool
    min_eigenvalue: float
    canonical_residual: float
    state_residual: float
    kernel: str
    tol: Tolerances

    @property
    def dop1(self) -> bool:
        return self.dop1_residual <= self.tol.eq_tol

    @property
    def canonical(self) -> bool:
        return self.canonical_residual <= self.tol.eq_tol and self.state_residual <= self.tol.eq_tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "dop1": self.dop1,
            "dop1_residual": self.dop1_residual,
            "dop2": self.contractive,
            "min_eigenvalue": self.min_eigenvalue,
            "canonical": self.canonical,
            "canonical_residual": self.canonical_residual,
            "state_residual": self.state_residual,
            "kernel": self.kernel,
        }


def gleason_check(
    obj: Colligation | OutputPair, cfg: SamplingConfig | None = None, tol: Tolerances | None = None
) -> GleasonReport:
    """
    Check the Gleason identity on f = O x and the canonical form of kernel sections.

    - f(l) - f(0) = sum_j l_j (O A_j x)(l) at sampled l for a random x
    - the pair is contractive (the Gleason tuple is a contraction)
    - the sections K(., zeta) y, with K = K_S for a colligation and K_{C,A}
      for a bare pair, are the images of the states (I - A* Z(zeta)*)^-1 C* y:
      their Gram in the lifted metric matches the kernel
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    p = obj.pair if isinstance(obj, Colligation) else obj
    points = sample_points(p.d, cfg, _GLEASON_STREAM)
    rng = cfg.generator(_GLEASON_STREAM)

    dop1 = 0.0
    if p.dim_x:
        x = rng.standard_normal((p.dim_x, 1)) + 1j * rng.standard_normal((p.dim_x, 1))
        x /= np.linalg.norm(x)
        cx = p.C @ x
        for point in points:
            shifted = sum(z * observe(p, point, a @ x) for z, a in zip(point.coords, p.A.blocks))
            dop1 = max(dop1, operator_norm(observe(p, point, x) - cx - shifted))

    pair_class = classify_pair(p, tol)

    if isinstance(obj, Colligation):
        kernel_gram = SchurKernel(SchurEvaluator.from_colligation(obj)).gram(points, cfg.threads)
        kernel_name = "schur"
    else:
        kernel_gram = PairKernel(p).gram(points, cfg.threads)
        kernel_name = "pair"
    states = np.hstack([adjoint(resolvent_row(p, point)) for point in points])
    lifted = observability_gram(p, tol=tol)
    canonical = max_abs(adjoint(states) @ lifted @ states - kernel_gram) if p.dim_x else max_abs(kernel_gram)
    state_residual = operator_norm(states - lifted @ states) if p.dim_x else 0.0

    return GleasonReport(
        dop1_residual=dop1,
        contractive=pair_class.contractive_pair,
        min_eigenvalue=pair_class.min_eigenvalue,
        canonical_residual=canonical,
        state_residual=state_residual,
        kernel=kernel_name,
        tol=tol,
    )


# Thresholds of the worked-example regression suite.
_COISOMETRY_THRESHOLD = 1e-12
_CLOSED_FORM_THRESHOLD = 1e-12
_KERNEL_THRESHOLD = 1e-10
_SUITE_GAMMAS = (0.0, 0.2, CONTRACTIVITY_THRESHOLD - 0.01)
_EQUIVALENCE_GAMMAS = (0.0, 0.1, 0.2, 0.3)


def example33_suite(cfg: SamplingConfig | None = None, tol: Tolerances | None = None) -> Report:
    """
    Regression suite for the two-variable worked example.

    Args:
        cfg: Sampling settings
        tol: Tolerances

    Returns:
        Report with one record per check
    """
    cfg = cfg or SamplingConfig()
    tol = tol or Tolerances()
    report = Report("example33", settings={"tolerances": tol.to_dict(), "sampling": cfg.to_dict()})
    u0 = example_colligation()
    schur = example_schur()

    def coisometry() -> CheckOutcome:
        record = classify_colligation(u0, tol)
        return record.coisometry_residual <= _COISOMETRY_THRESHOLD, record.coisometry_residual, {
            "unitary": record.unitary
        }

    def closed_form() -> CheckOutcome:
        wide = replace(cfg, sample_count=100, sample_radius=0.95)
        points = sample_points(2, wide, 0)
        error = max(max_abs(transfer_eval(u0, pt) - example_closed_form(pt)) for pt in points)
        return error <= _CLOSED_FORM_THRESHOLD, error, {"points": len(points)}

    def resolvent(gamma: float) -> CheckOutcome:
        points = sample_points(2, cfg, 0)
        pair = example_pair(gamma)
        error = max(max_abs(resolvent_row(pair, pt) - example_resolvent_row(pt)) for pt in points)
        return error <= _CLOSED_FORM_THRESHOLD, error, {}

    def kernel_equality(gamma: float) -> CheckOutcome:
        points = sample_points(2, cfg, _KERNEL_STREAM)
        cert = gram_certify(SchurKernel(schur), points, tol, k2=PairKernel(example_pair(gamma)))
        diff = float(cert.max_diff or 0.0)
        return diff <= _KERNEL_THRESHOLD and cert.psd, diff, {"min_eig": cert.min_eig}

    def threshold() -> CheckOutcome:
        inside = classify_pair(example_pair(CONTRACTIVITY_THRESHOLD - 0.001), tol).min_eigenvalue
        outside = classify_pair(example_pair(CONTRACTIVITY_THRESHOLD + 0.001), tol).min_eigenvalue
        return inside >= 0.0 > outside, None, {"inside": inside, "outside": outside}

    def realize() -> CheckOutcome:
        pair = example_pair(0.2)
        blocks = completion_pipeline(schur, pair, cfg, tol)
        completion = parrott_complete(blocks)
        check = check_completion(completion.colligation, blocks.dsub, schur, cfg, tol)
        passed = check.weakly_coisometric and check.reproduction_error <= tol.eq_tol
        return passed, max(check.weak_coisometry_residual, check.reproduction_error), check.to_dict()

    def family() -> CheckOutcome:
        blocks = completion_pipeline(schur, example_pair(0.0), cfg, tol)
        result = classify_family(blocks)
        passed = result.coisometric_achievable and not result.unique and not result.unitary_achievable
        reduction = result.reduction_check or {}
        passed = passed and bool(reduction.get("coisometric", False))
        return passed, None, result.to_dict()

    def subspaces() -> CheckOutcome:
        dsub = domain_subspace(example_pair(0.0), cfg, tol)
        u0_space = kernel_of_multiplier(schur, cfg, tol)
        witness = subspace_intersection_dim(dsub.complement, example_complement_witness(), tol)
        direction = subspace_intersection_dim(u0_space.basis, example_degenerate_direction(), tol)
        passed = dsub.dim == 5 and witness == 1 and u0_space.dim == 1 and direction == 1
        return passed, None, {"dim_D": dsub.dim, "dim_U0": u0_space.dim}

    def observable() -> CheckOutcome:
        data = observability_data(example_pair(0.0), tol=tol)
        return data.observable, None, data.to_dict()

    def equivalence_grid() -> CheckOutcome:
        wrong = []
        for g1 in _EQUIVALENCE_GAMMAS:
            for g2 in _EQUIVALENCE_GAMMAS:
                result = observability_and_equivalence(example_pair(g1), example_pair(g2), tol)
                if result.equivalent != (g1 == g2):
                    wrong.append([g1, g2])
        return not wrong, None, {"mismatches": wrong}

    report.record("u0_coisometric", coisometry)
    report.record("closed_form", closed_form)
    for gamma in (0.0, 0.2):
        report.record(f"resolvent_row[gamma={gamma:.4f}]", lambda g=gamma: resolvent(g))
    for gamma in _SUITE_GAMMAS:
        report.record(f"kernel_equality[gamma={gamma:.4f}]", lambda g=gamma: kernel_equality(g))
    report.record("contractivity_threshold", threshold)
    report.record("subspaces", subspaces)
    report.record("observable", observable)
    report.record("realize_with_pair[gamma=0.2000]", realize)
    report.record("family[gamma=0.0000]", family)
    report.record("equivalence_grid", equivalence_grid)
    return report
