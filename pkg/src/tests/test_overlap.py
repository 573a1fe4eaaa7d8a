"""
Tests for pushforward kernels and overlapping spaces.
"""

import numpy as np
import pytest

from schur_realization.colligation import BallPoint, sample_points
from schur_realization.exceptions import DegenerateGram, DimensionMismatch, NotPSD
from schur_realization.kernels import AmplifiedKernel, SchurKernel, SzegoKernel
from schur_realization.overlap import (
    ConstantFactor,
    PushforwardKernel,
    SampledRKHS,
    ZFactor,
    align_with_witness,
    coisometry_and_overlap,
    complement_witness_values,
    example_e1,
    example_e2,
    input_intersection_dim,
    overlap_demo,
    pushforward_kernel,
    range_complement_witness_values,
)
from schur_realization.subspaces import build_V_and_check, domain_subspace

DISK_POINTS = [BallPoint((0.1,)), BallPoint((-0.3,)), BallPoint((0.2j,)), BallPoint((0.5,))]


class TestPushforwardKernel:
    """Tests for PushforwardKernel."""

    def test_z_factor(self, schur33):
        """Test M_F(l, z) = <l, z> K_S(l, z) for F = Z."""
        kernel, factor = example_e1(schur33)
        lam, zeta = BallPoint((0.1, 0.2)), BallPoint((-0.3, 0.1j))
        expected = lam.inner(zeta) * SchurKernel(schur33)(lam, zeta)
        assert np.allclose(pushforward_kernel(kernel, factor, lam, zeta), expected)

    def test_row_factor(self, schur33):
        """Test M_F(l, z) = K_S(l, z) + S(l) S(z)* for F = [I, S]."""
        kernel, factor = example_e2(schur33)
        lam, zeta = BallPoint((0.1, 0.2)), BallPoint((-0.3, 0.1j))
        expected = SchurKernel(schur33)(lam, zeta) + schur33(lam) @ schur33(zeta).conj().T
        assert np.allclose(pushforward_kernel(kernel, factor, lam, zeta), expected)

    def test_factor_mismatch(self, schur33):
        """Test that F must act on the blocks of M."""
        with pytest.raises(DimensionMismatch) as exc:
            PushforwardKernel(AmplifiedKernel(SchurKernel(schur33), 2), ZFactor(2, 2))
        assert exc.value.blocks == ("F", "M")

    def test_example_dimensions(self, schur33):
        """Test that the row construction needs the shape of S."""
        with pytest.raises(DimensionMismatch):
            example_e2(schur33, dim_u=3)


class TestSampledRKHS:
    """Tests for SampledRKHS and coisometry_and_overlap on small kernels."""

    def test_identity_factor_has_no_overlap(self, tol):
        """Test that F = I gives M_F = M and a unitary multiplier."""
        srk = SampledRKHS.build(SzegoKernel(1), ConstantFactor(1, np.eye(1)), DISK_POINTS, tol)
        assert srk.dim == srk.dim_f == 4
        result = coisometry_and_overlap(srk, tol)
        assert result.overlap_dim == 0
        assert result.passed

    def test_zero_factor_overlaps_everything(self, tol):
        """Test that F = 0 makes the whole sampled span overlap."""
        srk = SampledRKHS.build(SzegoKernel(1), ConstantFactor(1, np.zeros((1, 1))), DISK_POINTS, tol)
        assert srk.dim_f == 0
        result = coisometry_and_overlap(srk, tol)
        assert result.overlap_dim == 4
        assert result.passed

    def test_coordinates(self, tol):
        """Test that orthonormal coordinates have the Gram metric."""
        srk = SampledRKHS.build(SzegoKernel(1), ConstantFactor(1, np.eye(1)), DISK_POINTS, tol)
        coefficients = np.eye(4, dtype=complex)[:, :2]
        coords = srk.coords_of(coefficients)
        assert np.allclose(coords.conj().T @ coords, srk.gram[:2, :2])
        assert np.allclose(srk.values(coords), srk.gram[:, :2])

    def test_negative_gram_eigenvalue(self, diagonal_kernel, tol):
        """Test that a Gram with a small negative eigenvalue is refused whatever its scale."""
        points = DISK_POINTS[:2]
        kernel = diagonal_kernel({points[0]: 100.0, points[1]: -5e-9})
        with pytest.raises(NotPSD):
            SampledRKHS.build(kernel, ConstantFactor(1, np.eye(1)), points, tol)

    def test_degenerate_gram(self, tol):
        """Test that a zero kernel is refused."""
        zero = PushforwardKernel(SzegoKernel(1), ConstantFactor(1, np.zeros((1, 1))))
        with pytest.raises(DegenerateGram):
            SampledRKHS.build(zero, ConstantFactor(1, np.eye(1)), DISK_POINTS, tol)


class TestWorkedOverlaps:
    """Tests for the two overlap constructions on the worked example."""

    def test_amplified_kernel_with_z(self, schur33, pair0, small_cfg, tol):
        """Test that the overlap is a line matching the complement of D."""
        points = sample_points(2, small_cfg, count=30)
        kernel, factor = example_e1(schur33)
        srk = SampledRKHS.build(kernel, factor, points, tol)
        result = coisometry_and_overlap(srk, tol)
        assert result.passed
        assert result.overlap_dim == 1
        dsub = domain_subspace(pair0, small_cfg, tol)
        witness = complement_witness_values(pair0, dsub.complement, points)
        aligned, common = align_with_witness(srk.values(result.overlap_basis), witness, tol)
        assert aligned
        assert common == 1

    def test_identity_sum_with_row(self, schur33, pair0, small_cfg, tol):
        """Test an overlap of dimension 4 meeting the constants in U0."""
        points = sample_points(2, small_cfg, count=30)
        kernel, factor = example_e2(schur33)
        srk = SampledRKHS.build(kernel, factor, points, tol)
        result = coisometry_and_overlap(srk, tol)
        assert result.passed
        assert result.overlap_dim == 4
        v = build_V_and_check(schur33, pair0, domain_subspace(pair0, small_cfg, tol), small_cfg, tol)
        witness = range_complement_witness_values(pair0, v.range_space.complement, points)
        aligned, _ = align_with_witness(srk.values(result.overlap_basis), witness, tol)
        assert aligned
        assert input_intersection_dim(srk, result, 1, 7, tol) == 1

    def test_overlap_demo(self, schur33, pair02, small_cfg, tol):
        """Test that the demo passes with the gamma = 0.2 pair."""
        report = overlap_demo(schur33, pair02, small_cfg, tol)
        assert report.passed
        assert report.get("overlap_e2").details["input_intersection_dim"] == 1
