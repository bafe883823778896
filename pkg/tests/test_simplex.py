import numpy as np
import pytest

from biarch import (
    DimensionMismatch,
    MaxIterationsExceeded,
    NonFinite,
    PenaltyProblem,
    nnls,
    solve_simplex_ls,
)
from biarch.simplex import _penalized_columns

from oracles import projected_gradient_nnls, simplex_grid_search_rss


class TestNnls:
    def test_identity_clamps_negative(self):
        x = nnls(np.eye(2), np.array([3.0, -2.0]))
        np.testing.assert_allclose(x, [3.0, 0.0], atol=1e-12)

    def test_interior_optimum(self):
        x = nnls(np.array([[1.0], [1.0]]), np.array([1.0, 3.0]))
        np.testing.assert_allclose(x, [2.0], atol=1e-12)

    def test_zero_target(self):
        x = nnls(np.array([[1.0, 0.5], [0.2, 1.0]]), np.zeros(2))
        np.testing.assert_array_equal(x, np.zeros(2))

    def test_matches_projected_gradient_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            A = rng.normal(size=(6, 3))
            b = rng.normal(size=6)
            x = nnls(A, b)
            ref = projected_gradient_nnls(A, b)
            np.testing.assert_allclose(x, ref, atol=1e-6)

    def test_kkt_conditions(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p, k = rng.integers(2, 9), rng.integers(1, 6)
            A = rng.normal(size=(p, k))
            b = rng.normal(size=p)
            x = nnls(A, b)
            assert np.all(x >= 0)
            grad = A.T @ (A @ x - b)
            scale = 1e-8 * max(np.linalg.norm(A.T @ b), 1e-30)
            assert np.all(grad[x > 0] <= scale) and np.all(grad[x > 0] >= -scale)
            assert np.all(grad[x == 0] >= -scale)

    def test_guard_raises(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(5, 3))
        b = A @ np.array([1.0, 2.0, 3.0])
        with pytest.raises(MaxIterationsExceeded):
            nnls(A, b, max_iter=0)

    def test_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            nnls(np.eye(2), np.ones(3))

    def test_rejects_nan(self):
        with pytest.raises(NonFinite):
            nnls(np.array([[np.nan], [1.0]]), np.ones(2))


class TestPenaltyProblem:
    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            PenaltyProblem(np.eye(2), np.ones((3, 1)))

    def test_penalty_positive(self):
        with pytest.raises(ValueError):
            PenaltyProblem(np.eye(2), np.ones((2, 1)), penalty_c=0.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(NonFinite):
            PenaltyProblem(np.eye(2), np.full((2, 1), np.nan))


class TestSolveSimplexLs:
    def test_target_already_in_simplex(self):
        out = solve_simplex_ls(
            PenaltyProblem(np.eye(2), np.array([[0.3], [0.7]]), 200.0)
        )
        np.testing.assert_allclose(out[:, 0], [0.3, 0.7], atol=1e-4)

    def test_single_column_forces_ones(self):
        rng = np.random.default_rng(1)
        design = rng.normal(size=(5, 1))
        targets = rng.normal(size=(5, 3))
        out = solve_simplex_ls(PenaltyProblem(design, targets, 200.0))
        np.testing.assert_array_equal(out, np.ones((1, 3)))

    def test_columns_sum_to_one_nonnegative(self):
        rng = np.random.default_rng(2)
        out = solve_simplex_ls(
            PenaltyProblem(rng.normal(size=(6, 4)), rng.normal(size=(6, 5)), 200.0)
        )
        assert np.all(out >= 0)
        np.testing.assert_allclose(out.sum(axis=0), 1.0, rtol=0, atol=1e-12)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            A = rng.normal(size=(4, 3))
            b = rng.normal(size=(4, 1))
            out = solve_simplex_ls(PenaltyProblem(A, b, 200.0))
            got = float(np.sum((A @ out[:, 0] - b[:, 0]) ** 2))
            ref = simplex_grid_search_rss(A, b)
            assert abs(got - ref) <= 1e-3

    def test_degenerate_column_falls_back_to_uniform(self):
        # both design columns point away from the target strongly enough to
        # defeat the penalty pull, so raw NNLS returns all zeros
        design = np.array([[1.0, 2.0], [1.0, 2.0]])
        target = np.array([[-1e6], [-1e6]])
        out = solve_simplex_ls(PenaltyProblem(design, target, 200.0))
        np.testing.assert_allclose(out[:, 0], [0.5, 0.5], rtol=0, atol=0)

    def test_violation_shrinks_with_penalty(self):
        rng = np.random.default_rng(4)
        A = rng.normal(size=(6, 3))
        B = rng.normal(size=(6, 2))
        violations = []
        for C in (20.0, 200.0, 2000.0):
            raw = _penalized_columns(PenaltyProblem(A, B, C))
            violations.append(float(np.max(np.abs(1.0 - raw.sum(axis=0)))))
        assert violations[0] > violations[1] > violations[2]

    def test_grid_oracle_never_beats_solver_materially(self):
        rng = np.random.default_rng(5)
        for k in (1, 2, 3):
            for _ in range(5):
                A = rng.normal(size=(5, k))
                b = rng.normal(size=(5, 1))
                out = solve_simplex_ls(PenaltyProblem(A, b, 200.0))
                got = float(np.sum((A @ out[:, 0] - b[:, 0]) ** 2))
                ref = simplex_grid_search_rss(A, b)
                assert got <= ref + 1e-3
