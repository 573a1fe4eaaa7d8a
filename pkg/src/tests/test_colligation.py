"""
Tests for ball points, colligations, evaluation and classification.
"""

import numpy as np
import pytest

from schur_realization.colligation import (
    BallPoint,
    Colligation,
    OperatorTuple,
    OutputPair,
    check_distinct,
    classify,
    evaluate_many,
    resolvent_row,
    sample_points,
    solve_intertwiner,
    transfer_eval,
    transfer_eval_adjoint,
    unitarily_equivalent_colligations,
)
from schur_realization.config import SamplingConfig
from schur_realization.exceptions import DimensionMismatch, DuplicatePoints, OutsideBall, SingularResolvent
from schur_realization.numerics import adjoint
from schur_realization.worked_examples import (
    CONTRACTIVITY_THRESHOLD,
    example_closed_form,
    example_pair,
    example_resolvent_row,
    shift_colligation,
)


class TestBallPoint:
    """Tests for BallPoint."""

    def test_inner_product(self):
        """Test <l, z> = sum l_j conj(z_j)."""
        lam = BallPoint((0.5, 0.5j))
        zeta = BallPoint((0.5j, 0.5))
        assert lam.inner(zeta) == pytest.approx(0.5 * -0.5j + 0.5j * 0.5)

    def test_outside_ball(self):
        """Test that points of norm at least 1 are refused."""
        with pytest.raises(OutsideBall):
            BallPoint((0.8, 0.6))

    def test_closure_allows_sphere(self):
        """Test that closure() accepts points on the sphere."""
        assert BallPoint.closure((0.6, 0.8)).d == 2

    def test_z_row(self):
        """Test Z(l) = [l1 I, l2 I]."""
        z = BallPoint((0.1, 0.2)).z_row(2)
        assert np.allclose(z, np.array([[0.1, 0, 0.2, 0], [0, 0.1, 0, 0.2]]))

    def test_empty_point(self):
        """Test that a point needs coordinates."""
        with pytest.raises(DimensionMismatch):
            BallPoint(())


class TestColligation:
    """Tests for Colligation construction."""

    def test_worked_example_shape(self, u0):
        """Test the 7 x 10 shape of the worked-example colligation."""
        assert u0.matrix.shape == (7, 10)
        assert (u0.d, u0.dim_x, u0.dim_u, u0.dim_y) == (2, 3, 7, 1)

    def test_from_matrix_inverts_matrix(self, u0):
        """Test that splitting the assembled matrix gives back the blocks."""
        again = Colligation.from_matrix(u0.matrix, d=2, dim_x=3)
        assert np.array_equal(again.matrix, u0.matrix)

    def test_block_count_mismatch(self):
        """Test that B needs one block per variable."""
        with pytest.raises(DimensionMismatch) as exc:
            Colligation(OperatorTuple.zeros(2, 1), (np.zeros((1, 1)),), np.ones((1, 1)), np.zeros((1, 1)))
        assert "B" in exc.value.blocks

    def test_block_shape_mismatch(self):
        """Test that a B block with the wrong shape is refused."""
        with pytest.raises(DimensionMismatch):
            Colligation(OperatorTuple.zeros(1, 2), (np.zeros((1, 1)),), np.ones((1, 2)), np.zeros((1, 1)))


class TestEvaluation:
    """Tests for transfer-function evaluation."""

    def test_closed_form(self, u0, cfg):
        """Test S of the worked example against its closed form."""
        for point in sample_points(2, cfg):
            assert np.max(np.abs(transfer_eval(u0, point) - example_closed_form(point))) < 1e-12

    @pytest.mark.parametrize("gamma", [0.0, 0.2, -0.3])
    def test_resolvent_row_independent_of_gamma(self, gamma, cfg):
        """Test that C (I - Z A_gamma)^-1 has the same closed form for every gamma."""
        pair = example_pair(gamma)
        for point in sample_points(2, cfg):
            assert np.max(np.abs(resolvent_row(pair, point) - example_resolvent_row(point))) < 1e-12

    def test_adjoint_evaluation(self, u0, cfg):
        """Test that the adjoint form equals S(z)*."""
        for point in sample_points(2, cfg, count=10):
            assert np.allclose(transfer_eval_adjoint(u0, point), adjoint(transfer_eval(u0, point)))

    def test_shift(self):
        """Test that the one-variable shift realizes S(l) = l."""
        assert transfer_eval(shift_colligation(), BallPoint((0.3 - 0.1j,)))[0, 0] == pytest.approx(0.3 - 0.1j)

    def test_singular_resolvent(self):
        """Test that a singular pencil is reported."""
        c = Colligation.from_matrix(np.array([[2.0, 1.0], [1.0, 0.0]]), d=1, dim_x=1)
        with pytest.raises(SingularResolvent):
            transfer_eval(c, BallPoint((0.5,)))

    def test_dimension_mismatch(self, u0):
        """Test that a point in the wrong dimension is refused."""
        with pytest.raises(DimensionMismatch):
            transfer_eval(u0, BallPoint((0.1,)))

    def test_evaluate_many_keeps_order(self, u0, cfg):
        """Test that threaded evaluation returns results in input order."""
        points = sample_points(2, cfg, count=12)
        sequential = evaluate_many(lambda p: transfer_eval(u0, p), points, threads=1)
        threaded = evaluate_many(lambda p: transfer_eval(u0, p), points, threads=4)
        for a, b in zip(sequential, threaded):
            assert np.array_equal(a, b)


class TestSampling:
    """Tests for sample_points and check_distinct."""

    def test_deterministic(self):
        """Test that the seed fixes the sample."""
        cfg = SamplingConfig(rng_seed=3)
        assert sample_points(2, cfg, 1) == sample_points(2, cfg, 1)

    def test_streams_differ(self, cfg):
        """Test that different streams give different samples."""
        assert sample_points(2, cfg, 1) != sample_points(2, cfg, 2)

    def test_duplicates(self):
        """Test that repeated points are refused."""
        with pytest.raises(DuplicatePoints):
            check_distinct([BallPoint((0.1, 0.2)), BallPoint((0.3, 0.0)), BallPoint((0.1, 0.2))])


class TestClassify:
    """Tests for classify."""

    def test_worked_example_coisometric(self, u0):
        """Test that U_0 is coisometric but not unitary."""
        result = classify(u0)
        assert result.coisometric
        assert not result.unitary
        assert result.coisometry_residual <= 1e-12

    def test_permutation_unitary(self, permutation):
        """Test that the permutation colligation is unitary."""
        assert classify(permutation).unitary

    def test_pair_threshold(self):
        """Test contractivity of (C, A_gamma) on both sides of the threshold."""
        inside = classify(example_pair(CONTRACTIVITY_THRESHOLD - 0.001))
        outside = classify(example_pair(CONTRACTIVITY_THRESHOLD + 0.001))
        assert inside.contractive_pair
        assert not outside.contractive_pair
        assert inside.min_eigenvalue > 0 > outside.min_eigenvalue

    def test_pair_min_eigenvalue(self):
        """Test the smallest eigenvalue 1/4 - 2 gamma^2 of the pair defect."""
        for gamma in (0.0, 0.1, 0.2):
            assert classify(example_pair(gamma)).min_eigenvalue == pytest.approx(0.25 - 2 * gamma**2)

    def test_rejects_other_objects(self):
        """Test that only colligations and pairs are classified."""
        with pytest.raises(DimensionMismatch):
            classify(np.eye(2))


class TestEquivalence:
    """Tests for intertwiners and unitary equivalence."""

    def test_rotated_pair(self, pair0, rng, tol):
        """Test that a unitarily rotated pair is recognized with its rotation."""
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        rotated = OutputPair(pair0.C @ adjoint(q), OperatorTuple(tuple(q @ a @ adjoint(q) for a in pair0.A.blocks)))
        u, residual, unitarity = solve_intertwiner(pair0, rotated, tol)
        assert u is not None
        assert residual < 1e-9
        assert unitarity < 1e-9
        assert np.allclose(u, q)

    def test_colligations(self, u0, rng, tol):
        """Test equivalence of U_0 with a similar copy and not with a perturbed one."""
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        similar = Colligation(
            OperatorTuple(tuple(q @ a @ adjoint(q) for a in u0.A.blocks)),
            tuple(q @ b for b in u0.B),
            u0.C @ adjoint(q),
            u0.D,
        )
        equivalent, witness = unitarily_equivalent_colligations(u0, similar, tol)
        assert equivalent
        assert witness is not None

        changed = Colligation(u0.A, u0.B, u0.C, u0.D * 0.5)
        equivalent, _ = unitarily_equivalent_colligations(u0, changed, tol)
        assert not equivalent
