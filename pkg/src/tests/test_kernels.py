"""
Tests for Schur evaluators, kernels and Gram certificates.
"""

import numpy as np
import pytest

from schur_realization.colligation import BallPoint, Colligation, resolvent_row, sample_points, transfer_eval
from schur_realization.exceptions import DimensionMismatch, DuplicatePoints, NotContractive
from schur_realization.kernels import (
    AmplifiedKernel,
    DirectSumKernel,
    IdentityKernel,
    PairKernel,
    SchurEvaluator,
    SchurKernel,
    SzegoKernel,
    defect_identity_residual,
    eval_kernel,
    gram_certify,
    multi_indices,
    taylor_coefficients,
)
from schur_realization.worked_examples import example_pair, shift_colligation


class TestSchurEvaluator:
    """Tests for SchurEvaluator."""

    def test_from_colligation(self, u0, schur33, cfg):
        """Test that a realization and the closed form agree."""
        s = SchurEvaluator.from_colligation(u0)
        for point in sample_points(2, cfg, count=10):
            assert np.allclose(s(point), schur33(point), atol=1e-12)

    def test_at_origin(self, schur33):
        """Test S(0) = [sqrt(3)/2, 0, ..., 0]."""
        expected = np.zeros((1, 7))
        expected[0, 0] = np.sqrt(3.0) / 2.0
        assert np.allclose(schur33.at_origin, expected)

    def test_compose_right(self, u0, cfg):
        """Test that S W is realized by (A, B W, C, D W)."""
        s = SchurEvaluator.from_colligation(u0)
        w = np.eye(7)[:, :3]
        sw = s.compose_right(w)
        assert sw.dim_u == 3
        assert sw.colligation is not None
        point = sample_points(2, cfg, count=1)[0]
        assert np.allclose(sw(point), s(point) @ w)
        assert np.allclose(transfer_eval(sw.colligation, point), s(point) @ w)

    def test_compose_right_shape(self, schur33):
        """Test that W needs dimU rows."""
        with pytest.raises(DimensionMismatch):
            schur33.compose_right(np.eye(3))

    def test_taylor_coefficients_of_shift(self):
        """Test that S(l) = l has coefficients 0 and 1."""
        s = SchurEvaluator.from_colligation(shift_colligation())
        coefficients = s.taylor_coefficients(3)
        assert np.allclose(coefficients[(0,)], 0.0)
        assert np.allclose(coefficients[(1,)], 1.0)
        assert np.allclose(coefficients[(2,)], 0.0)

    def test_taylor_coefficients_without_realization(self, schur33):
        """Test that closed forms have no coefficients."""
        assert schur33.taylor_coefficients(2) is None


class TestKernels:
    """Tests for the kernel classes."""

    def test_szego(self):
        """Test k(l, z) = 1 / (1 - <l, z>)."""
        lam = BallPoint((0.5, 0.0))
        assert SzegoKernel(2)(lam, lam)[0, 0] == pytest.approx(1.0 / 0.75)

    def test_schur_equals_pair_kernel(self, schur33, cfg):
        """Test K_S = K_{C,A_gamma} at sampled pairs for several gamma."""
        points = sample_points(2, cfg, count=10)
        for gamma in (0.0, 0.2, 0.34):
            k_pair = PairKernel(example_pair(gamma))
            for lam in points[:5]:
                for zeta in points[5:]:
                    assert np.max(np.abs(SchurKernel(schur33)(lam, zeta) - k_pair(lam, zeta))) < 1e-10

    def test_direct_sum_and_amplified(self, schur33):
        """Test the block structure of derived kernels."""
        lam = BallPoint((0.1, 0.2))
        ks = SchurKernel(schur33)(lam, lam)
        total = DirectSumKernel(SchurKernel(schur33), IdentityKernel(2, 3))(lam, lam)
        assert total.shape == (4, 4)
        assert np.allclose(total[:1, :1], ks)
        assert np.allclose(total[1:, 1:], np.eye(3))
        amplified = AmplifiedKernel(SchurKernel(schur33), 2)(lam, lam)
        assert np.allclose(amplified, np.kron(np.eye(2), ks))

    def test_eval_kernel_dimension(self, schur33):
        """Test that points must match the kernel dimension."""
        with pytest.raises(DimensionMismatch):
            eval_kernel(SchurKernel(schur33), BallPoint((0.1,)), BallPoint((0.1,)))

    def test_fast_gram_matches_blocks(self, schur33, pair0, cfg):
        """Test the specialized Gram assemblies against the generic one."""
        points = sample_points(2, cfg, count=6)
        for kernel in (SchurKernel(schur33), PairKernel(pair0)):
            generic = np.block([[kernel(p, q) for q in points] for p in points])
            assert np.allclose(kernel.gram(points), generic)


class TestDefectIdentity:
    """Tests for the identity K_S = K_{C,A} + defect term."""

    def test_worked_example(self, u0, cfg):
        """Test the identity on the worked example."""
        points = sample_points(2, cfg, count=6)
        for lam in points[:3]:
            for zeta in points[3:]:
                assert defect_identity_residual(u0, lam, zeta) < 1e-12

    def test_not_contractive(self):
        """Test that non-contractive colligations are refused."""
        big = shift_colligation()
        big = Colligation(big.A, tuple(2 * b for b in big.B), big.C, big.D)
        with pytest.raises(NotContractive):
            defect_identity_residual(big, BallPoint((0.1,)), BallPoint((0.2,)))


class TestGramCertify:
    """Tests for gram_certify."""

    def test_equal_kernels(self, schur33, pair02, cfg, tol):
        """Test a positive certificate with equal kernels."""
        points = sample_points(2, cfg)
        cert = gram_certify(SchurKernel(schur33), points, tol, k2=PairKernel(pair02))
        assert cert.psd
        assert cert.max_diff < 1e-10
        assert cert.to_dict()["points"] == 50

    def test_duplicate_points(self, schur33, tol):
        """Test that repeated points are refused."""
        point = BallPoint((0.1, 0.1))
        with pytest.raises(DuplicatePoints):
            gram_certify(SchurKernel(schur33), [point, point], tol)

    def test_non_psd_kernel(self, tol):
        """Test that -k_d is not certified positive."""

        class NegativeSzego(SzegoKernel):
            def __call__(self, lam, zeta):
                return -super().__call__(lam, zeta)

        points = [BallPoint((0.1, 0.0)), BallPoint((0.0, 0.3))]
        cert = gram_certify(NegativeSzego(2), points, tol)
        assert not cert.psd
        assert cert.min_eig < 0

    def test_negative_eigenvalue_beside_large_one(self, diagonal_kernel, tol):
        """Test that a small negative eigenvalue fails even next to a large positive one."""
        points = [BallPoint((0.1,)), BallPoint((0.3,))]
        cert = gram_certify(diagonal_kernel({points[0]: 100.0, points[1]: -5e-9}), points, tol)
        assert not cert.psd
        assert cert.min_eig == pytest.approx(-5e-9)

    def test_block_size_mismatch(self, schur33, tol):
        """Test that kernels with different blocks are not compared."""
        points = [BallPoint((0.1, 0.0))]
        with pytest.raises(DimensionMismatch):
            gram_certify(SchurKernel(schur33), points, tol, k2=IdentityKernel(2, 2))


class TestTaylorCoefficients:
    """Tests for multi-indices and output-pair coefficients."""

    def test_multi_indices(self):
        """Test the multi-indices of degree 2 in two variables."""
        assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]

    def test_coefficients_of_worked_example(self, pair0):
        """Test c_0 = C* and c_(1,0) = A_1* C*."""
        coefficients = taylor_coefficients(pair0, 1)
        assert np.allclose(coefficients[(0, 0)], pair0.C.conj().T)
        assert np.allclose(coefficients[(1, 0)], pair0.A.blocks[0].conj().T @ pair0.C.conj().T)

    def test_coefficients_match_resolvent(self, pair02):
        """Test the Taylor series against C (I - Z A)^-1 at a small point."""
        point = BallPoint((0.05, -0.03j))
        series = sum(
            np.conj(c).T * np.prod(np.array(point.coords) ** np.array(beta))
            for beta, c in taylor_coefficients(pair02, 12).items()
        )
        assert np.allclose(series, resolvent_row(pair02, point), atol=1e-12)
