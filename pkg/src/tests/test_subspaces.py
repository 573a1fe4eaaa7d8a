"""
Tests for the canonical subspace, the isometry V and the degeneracy space.
"""

import numpy as np
import pytest

from schur_realization.colligation import sample_points
from schur_realization.config import SamplingConfig
from schur_realization.exceptions import (
    DimensionMismatch,
    LeastSquaresInconsistent,
    NotContractivePair,
    RankInstability,
)
from schur_realization.kernels import SchurEvaluator
from schur_realization.numerics import isometry_residual, subspace_intersection_dim
from schur_realization.subspaces import (
    SubspaceBasis,
    build_V_and_check,
    complement_identity_residual,
    domain_subspace,
    kernel_of_multiplier,
    range_complement_residual,
)
from schur_realization.worked_examples import (
    CONTRACTIVITY_THRESHOLD,
    example_complement_witness,
    example_degenerate_direction,
    example_pair,
    permutation_colligation,
)


class TestSubspaceBasis:
    """Tests for SubspaceBasis."""

    def test_from_spanning(self, tol):
        """Test a plane in C^3 with its complementary line."""
        m = np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
        sub = SubspaceBasis.from_spanning(m, tol)
        assert (sub.dim, sub.complement_dim) == (2, 1)
        assert np.allclose(np.abs(sub.complement[:, 0]), [0.0, 0.0, 1.0])
        assert np.allclose(sub.projector @ m, m)

    def test_from_kernel(self, tol):
        """Test the null space of a row."""
        sub = SubspaceBasis.from_kernel(np.array([[1.0, 0.0, 0.0]]), tol)
        assert sub.dim == 2
        assert sub.to_dict()["ambient_dim"] == 3


class TestDomainSubspace:
    """Tests for domain_subspace."""

    def test_worked_example(self, pair0, cfg, tol):
        """Test dim D = 5 with the complement spanned by (e3; -e2)/sqrt(2)."""
        dsub = domain_subspace(pair0, cfg, tol)
        assert dsub.ambient_dim == 6
        assert dsub.dim == 5

    def test_too_few_points_warns_then_fails(self, pair0, tol, caplog):
        """Test that one point cannot reach dim D = 5 and says so before failing."""
        cfg = SamplingConfig(sample_count=1)
        with caplog.at_level("WARNING"), pytest.raises(RankInstability):
            domain_subspace(pair0, cfg, tol)
        assert "fewer than its dimension 5" in caplog.text
        assert dsub.stabilized
        assert dsub.degree == 4
        assert subspace_intersection_dim(dsub.complement, example_complement_witness(), tol) == 1

    def test_complement_identity(self, pair0, cfg, tol):
        """Test that sum_j l_j (O h_j) vanishes for h in the complement."""
        dsub = domain_subspace(pair0, cfg, tol)
        assert complement_identity_residual(pair0, dsub) < 1e-12

    def test_permutation_pair_fills_space(self, permutation, cfg, tol):
        """Test that (1, 0) in two variables has D equal to all of C^2."""
        dsub = domain_subspace(permutation.pair, cfg, tol)
        assert dsub.dim == 2
        assert dsub.complement_dim == 0

    def test_not_contractive(self, cfg, tol):
        """Test that pairs beyond the threshold are refused."""
        with pytest.raises(NotContractivePair):
            domain_subspace(example_pair(CONTRACTIVITY_THRESHOLD + 0.01), cfg, tol)

    def test_degree_cap_warning(self, pair0, tol, caplog):
        """Test that a cap below the stabilization degree is logged."""
        cfg = SamplingConfig(degree_cap=2)
        with caplog.at_level("WARNING"):
            dsub = domain_subspace(pair0, cfg, tol)
        assert "degree cap" in caplog.text
        assert not dsub.stabilized
        assert dsub.dim == 5


class TestIsometryV:
    """Tests for build_V_and_check."""

    @pytest.mark.parametrize("gamma", [0.0, 0.2])
    def test_isometric(self, schur33, gamma, cfg, tol):
        """Test that V is isometric for pairs sharing the kernel of S."""
        pair = example_pair(gamma)
        dsub = domain_subspace(pair, cfg, tol)
        v = build_V_and_check(schur33, pair, dsub, cfg, tol)
        assert v.isometric
        assert isometry_residual(v.matrix) < 1e-9
        assert v.matrix.shape == (10, 6)
        assert v.range_space.complement_dim == 4

    def test_range_complement(self, schur33, pair0, cfg, tol):
        """Test O x + S u = 0 for (x, u) orthogonal to the range of V."""
        dsub = domain_subspace(pair0, cfg, tol)
        v = build_V_and_check(schur33, pair0, dsub, cfg, tol)
        points = sample_points(2, cfg, count=10)
        assert range_complement_residual(schur33, pair0, v, points) < 1e-9

    def test_kernel_mismatch(self, schur33, pair0, cfg, tol):
        """Test that a function with another kernel is refused."""
        half = schur33.compose_right(0.5 * np.eye(7))
        dsub = domain_subspace(pair0, cfg, tol)
        with pytest.raises(LeastSquaresInconsistent):
            build_V_and_check(half, pair0, dsub, cfg, tol)

    def test_report_without_raising(self, schur33, pair0, cfg, tol):
        """Test that require_isometry=False returns a non-isometric V."""
        half = schur33.compose_right(0.5 * np.eye(7))
        dsub = domain_subspace(pair0, cfg, tol)
        v = build_V_and_check(half, pair0, dsub, cfg, tol, require_isometry=False)
        assert v.generator_residual < 1e-9
        assert not v.isometric

    def test_dimension_mismatch(self, pair0, cfg, tol):
        """Test that S and the pair must share d and dimY."""
        s = SchurEvaluator.from_colligation(permutation_colligation(3))
        dsub = domain_subspace(pair0, cfg, tol)
        with pytest.raises(DimensionMismatch):
            build_V_and_check(s, pair0, dsub, cfg, tol)


class TestKernelOfMultiplier:
    """Tests for kernel_of_multiplier."""

    def test_worked_example(self, schur33, cfg, tol):
        """Test that U0 is the line through the degenerate direction."""
        u0 = kernel_of_multiplier(schur33, cfg, tol)
        assert u0.dim == 1
        assert subspace_intersection_dim(u0.basis, example_degenerate_direction(), tol) == 1

    def test_realized_function(self, u0, cfg, tol):
        """Test the same space from the realization with Taylor coefficients."""
        space = kernel_of_multiplier(SchurEvaluator.from_colligation(u0), cfg, tol)
        assert space.dim == 1

    def test_trivial(self, permutation, cfg, tol):
        """Test that S = [l1, l2] has U0 = 0."""
        assert kernel_of_multiplier(SchurEvaluator.from_colligation(permutation), cfg, tol).dim == 0
