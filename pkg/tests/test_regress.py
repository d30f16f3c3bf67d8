import numpy as np
import pytest

from hedgedmc.basis import BasisSpec
from hedgedmc.regress import (
    InsufficientPathsError,
    solve_least_squares,
    stage_regression,
)


def normal_equations(design, target):
    return np.linalg.solve(design.T @ design, design.T @ target)


class TestSolveLeastSquares:
    def test_identity_system(self):
        sol = solve_least_squares(np.eye(2), np.array([3.0, 5.0]))
        assert sol.coefficients.tolist() == [3.0, 5.0]
        assert sol.residuals.tolist() == [0.0, 0.0]
        assert sol.rank == 2

    def test_column_of_ones_fits_mean(self):
        sol = solve_least_squares(np.ones((2, 1)), np.array([1.0, 3.0]))
        assert sol.coefficients[0] == pytest.approx(2.0)
        assert sol.residuals == pytest.approx([-1.0, 1.0])
        assert sol.residual_sum_squares == pytest.approx(2.0)

    def test_duplicated_column_pivot_drop(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=12)
        y = rng.normal(size=12)
        sol = solve_least_squares(np.column_stack([a, a]), y)
        beta = float(a @ y / (a @ a))  # single-column fit by hand
        assert sol.rank == 1
        assert sol.coefficients[1] == 0.0
        assert sol.coefficients[0] == pytest.approx(beta, rel=1e-12)
        assert np.allclose(sol.residuals, y - beta * a, rtol=1e-12)

    def test_matches_normal_equations_on_random_systems(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = rng.integers(10, 51)
            p = rng.integers(1, 9)
            design = rng.normal(size=(n, p))
            target = rng.normal(size=n)
            sol = solve_least_squares(design, target)
            ref = normal_equations(design, target)
            assert sol.rank == p
            assert np.allclose(sol.coefficients, ref, rtol=1e-8, atol=1e-10)

    def test_residual_orthogonal_to_columns(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            design = rng.normal(size=(30, 5))
            sol = solve_least_squares(design, rng.normal(size=30))
            res_norm = np.linalg.norm(sol.residuals)
            for j in range(5):
                col = design[:, j]
                bound = 1e-8 * np.linalg.norm(col) * max(res_norm, 1e-300)
                assert abs(col @ sol.residuals) <= max(bound, 1e-12)

    def test_rss_consistent_with_residuals(self):
        rng = np.random.default_rng(2)
        design = rng.normal(size=(25, 4))
        sol = solve_least_squares(design, rng.normal(size=25))
        assert sol.residual_sum_squares == pytest.approx(
            float(sol.residuals @ sol.residuals), rel=1e-10)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="non-finite"):
            solve_least_squares(np.array([[np.nan]]), np.array([1.0]))
        with pytest.raises(ValueError, match="empty"):
            solve_least_squares(np.empty((0, 0)), np.empty(0))
        with pytest.raises(ValueError, match="shapes"):
            solve_least_squares(np.eye(3), np.ones(2))


def _spec(degree=2, d=1, scale=100.0):
    return BasisSpec(degree=degree, n_assets=d, scaling=np.full(d, scale))


class TestStageRegression:
    def test_constant_target_exact(self):
        rng = np.random.default_rng(5)
        n = 60
        x_t = rng.uniform(80, 120, size=(n, 1))
        x_next = x_t * np.exp(rng.normal(0, 0.05, size=(n, 1)))
        rho = 1.02
        st = stage_regression(x_t, x_next, np.full(n, 7.0), _spec(), rho)
        assert st.gamma[0] == pytest.approx(7.0 / rho, rel=1e-9)
        assert np.allclose(st.gamma[1:], 0.0, atol=1e-9)
        assert np.allclose(st.psi, 0.0, atol=1e-9)
        assert st.local_risk == pytest.approx(0.0, abs=1e-18)

    def test_martingale_scaled_paths_reduce_to_value_fit(self):
        # x_next = rho * x_t kills every hedge regressor
        rng = np.random.default_rng(6)
        n, rho = 50, 1.01
        x_t = rng.uniform(50, 150, size=(n, 1))
        v_next = rng.normal(size=n)
        st = stage_regression(x_t, rho * x_t, v_next, _spec(), rho)
        assert not st.psi.any()
        from hedgedmc.basis import eval_value_basis
        plain = solve_least_squares(eval_value_basis(_spec(), x_t), v_next / rho)
        assert np.allclose(st.gamma, plain.coefficients, rtol=1e-9, atol=1e-12)

    def test_binomial_replication(self):
        # one-period up/down world, claim pays the asset itself: perfect
        # hedge of one unit, value equal to today's price, zero local risk
        x0, u, d = 100.0, 1.2, 0.9
        x_t = np.full((4, 1), x0)
        x_next = np.array([[u * x0], [d * x0], [u * x0], [d * x0]])
        spec = BasisSpec(degree=1, n_assets=1, scaling=np.array([x0]))
        st = stage_regression(x_t, x_next, x_next[:, 0], spec, rho=1.0)
        from hedgedmc.basis import eval_hedge_basis, eval_value_basis
        value = eval_value_basis(spec, x_t) @ st.gamma
        hedge = np.einsum("nak,ak->nk", eval_hedge_basis(spec, x_t), st.psi)
        assert np.allclose(value, x0, rtol=1e-10)
        assert np.allclose(hedge, 1.0, rtol=1e-10)
        assert st.local_risk == pytest.approx(0.0, abs=1e-16)

    def test_insufficient_paths(self):
        x = np.full((2, 1), 100.0)
        with pytest.raises(InsufficientPathsError):
            stage_regression(x, 1.1 * x, np.ones(2), BasisSpec(degree=1, n_assets=1,
                                                               scaling=np.array([100.0])), 1.0)

    def test_local_risk_bounded_by_target_variance(self):
        # the value-only fit with a constant element is always feasible
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = 80
            x_t = rng.uniform(50, 150, size=(n, 2))
            x_next = x_t * np.exp(rng.normal(0, 0.1, size=(n, 2)))
            v = rng.normal(2.0, 1.5, size=n)
            rho = 1.005
            st = stage_regression(x_t, x_next, v, _spec(degree=1, d=2), rho)
            assert st.local_risk <= np.var(v / rho) + 1e-12

    def test_hedge_block_layout(self):
        # psi[:, k] must pick up the k-th asset's columns
        rng = np.random.default_rng(9)
        n = 100
        x_t = rng.uniform(80, 120, size=(n, 2))
        x_next = x_t * np.exp(rng.normal(0, 0.08, size=(n, 2)))
        spec = _spec(degree=1, d=2)
        rho = 1.0
        # target only hedgeable through asset 2's move
        v_next = 3.0 * (x_next[:, 1] - x_t[:, 1])
        st = stage_regression(x_t, x_next, v_next, spec, rho)
        from hedgedmc.basis import eval_hedge_basis
        hedge = np.einsum("nak,ak->nk", eval_hedge_basis(spec, x_t), st.psi)
        assert np.allclose(hedge[:, 1], 3.0, rtol=1e-6)
        assert np.allclose(hedge[:, 0], 0.0, atol=1e-6)
