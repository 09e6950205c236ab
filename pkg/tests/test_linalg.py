import numpy as np
import pytest

from splitep.linalg import (
    DenseOperator,
    adjoint_apply,
    apply,
    as_vector,
    inner,
    norm,
    operator_norm_sq_upper,
)


class TestInner:
    def test_orthogonal_basis_vectors(self):
        assert inner([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_direct_arithmetic(self):
        assert inner([1.0, 2.0], [3.0, 4.0]) == 11.0

    def test_norm_is_induced(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = rng.standard_normal(rng.integers(1, 8))
            assert inner(u, u) == pytest.approx(norm(u) ** 2, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            inner([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_cauchy_schwarz_sampled(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            u = rng.standard_normal(5)
            v = rng.standard_normal(5)
            assert abs(inner(u, v)) <= norm(u) * norm(v) + 1e-12


class TestAsVector:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            as_vector([1.0, np.nan])

    def test_rejects_matrix(self):
        with pytest.raises(ValueError, match="1-D"):
            as_vector([[1.0, 2.0]])

    def test_dim_check(self):
        with pytest.raises(ValueError, match="dimension 3"):
            as_vector([1.0, 2.0], dim=3)

    def test_scalar_promotes(self):
        assert as_vector(2.0).shape == (1,)


class TestApply:
    def test_identity(self):
        A = DenseOperator(np.eye(2))
        assert np.array_equal(apply(A, [3.0, 4.0]), [3.0, 4.0])

    def test_coordinate_swap(self):
        A = DenseOperator([[0.0, 1.0], [1.0, 0.0]])
        assert np.array_equal(apply(A, [3.0, 4.0]), [4.0, 3.0])

    def test_zero_annihilates(self):
        A = DenseOperator(np.zeros((3, 2)))
        assert np.array_equal(apply(A, [5.0, -7.0]), np.zeros(3))

    def test_linearity_sampled(self):
        rng = np.random.default_rng(2)
        A = DenseOperator(rng.standard_normal((4, 3)))
        for _ in range(20):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            a, b = rng.standard_normal(2)
            lhs = apply(A, a * x + b * y)
            rhs = a * apply(A, x) + b * apply(A, y)
            assert np.allclose(lhs, rhs, atol=1e-12)

    def test_dimension_mismatch(self):
        A = DenseOperator(np.eye(2))
        with pytest.raises(ValueError, match="dimension 2"):
            apply(A, [1.0, 2.0, 3.0])

    def test_rejects_nonfinite_entries(self):
        with pytest.raises(ValueError, match="finite"):
            DenseOperator([[np.inf, 0.0]])


class TestAdjoint:
    def test_identity_self_adjoint(self):
        A = DenseOperator(np.eye(2))
        assert np.array_equal(adjoint_apply(A, [1.0, 2.0]), [1.0, 2.0])

    def test_first_row_as_column(self):
        A = DenseOperator([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(adjoint_apply(A, [1.0, 0.0]), [1.0, 2.0])

    def test_adjoint_identity_sampled(self):
        rng = np.random.default_rng(3)
        A = DenseOperator(rng.standard_normal((4, 3)))
        for _ in range(100):
            x = rng.standard_normal(3)
            y = rng.standard_normal(4)
            lhs = inner(apply(A, x), y)
            rhs = inner(x, adjoint_apply(A, y))
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + norm(x) * norm(y))

    def test_dimension_mismatch(self):
        A = DenseOperator(np.ones((4, 3)))
        with pytest.raises(ValueError, match="dimension 4"):
            adjoint_apply(A, [1.0, 2.0, 3.0])


def test_combination_norm_identity_sampled():
    # ||a x + (1-a) y||^2 == a ||x||^2 + (1-a) ||y||^2 - a (1-a) ||x-y||^2
    rng = np.random.default_rng(4)
    for _ in range(200):
        x = rng.standard_normal(6)
        y = rng.standard_normal(6)
        a = rng.uniform(0.0, 1.0)
        lhs = norm(a * x + (1.0 - a) * y) ** 2
        rhs = a * norm(x) ** 2 + (1.0 - a) * norm(y) ** 2 - a * (1.0 - a) * norm(x - y) ** 2
        assert abs(lhs - rhs) <= 1e-10


class TestOperatorNormBound:
    def test_identity(self):
        A = DenseOperator(np.eye(3))
        assert operator_norm_sq_upper(A, safety=1.01) == pytest.approx(1.01, rel=1e-12)

    def test_diagonal(self):
        A = DenseOperator(np.diag([2.0, 1.0]))
        assert operator_norm_sq_upper(A, safety=1.01) == pytest.approx(4.0 * 1.01, rel=1e-12)

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            A = DenseOperator(rng.standard_normal((5, 5)))
            sigma_max = np.linalg.svd(A.entries, compute_uv=False)[0]
            U = operator_norm_sq_upper(A, safety=1.0)
            assert U == pytest.approx(sigma_max**2, rel=1e-6)

    def test_zero_operator_keeps_reciprocal_finite(self):
        A = DenseOperator(np.zeros((3, 2)))
        U = operator_norm_sq_upper(A)
        assert U > 0.0
        assert np.isfinite(1.0 / U)

    def test_dominates_sampled_rayleigh_quotients(self):
        rng = np.random.default_rng(6)
        A = DenseOperator(rng.standard_normal((6, 4)))
        U = operator_norm_sq_upper(A, safety=1.0)
        for _ in range(100):
            x = rng.standard_normal(4)
            quotient = norm(apply(A, x)) ** 2 / norm(x) ** 2
            assert U >= quotient * (1.0 - 1e-8)

    def test_symmetric_structure_not_trapped(self):
        # gram [[2,-1],[-1,2]] has its top eigenvector orthogonal to all-ones;
        # the estimate must still reach the true squared norm 3.
        entries = np.linalg.cholesky(np.array([[2.0, -1.0], [-1.0, 2.0]])).T
        U = operator_norm_sq_upper(DenseOperator(entries), safety=1.0)
        assert U == pytest.approx(3.0, rel=1e-9)

    def test_parameter_validation(self):
        A = DenseOperator(np.eye(2))
        with pytest.raises(ValueError, match="iters"):
            operator_norm_sq_upper(A, iters=0)
        with pytest.raises(ValueError, match="safety"):
            operator_norm_sq_upper(A, safety=0.5)
