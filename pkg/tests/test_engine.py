import numpy as np
import pytest

import hedgedmc as h
from hedgedmc.engine import (
    ClaimSpec,
    exercise_statistics,
    price_european,
    price_real_option,
    project_value_stream,
    quantile_fan,
    reconstruct_hedge_account,
    regress_backward,
)


def call_claim(strike=100.0):
    return ClaimSpec(kind="european_payoff",
                     payoff=lambda x: np.maximum(x[:, 0] - strike, 0.0), strike=strike)


def gbm_paths(mu=0.0, sigma=0.3, x0=100.0, n_steps=65, dt=0.25 / 65, r=0.05,
              n_paths=5000, seed=20240, d=1, corr=None):
    params = h.GbmParams(mu=np.full(d, mu), sigma=np.full(d, sigma),
                         corr=np.eye(d) if corr is None else corr, x0=np.full(d, x0))
    grid = h.TimeGrid(n_steps=n_steps, dt=dt, r=r)
    return h.simulate_gbm(params, grid, n_paths=n_paths, seed=seed)


def constant_paths(level=100.0, n_paths=8, n_steps=12, dt=1 / 12, r=0.05, growth=0.0):
    grid = h.TimeGrid(n_steps=n_steps, dt=dt, r=r)
    factors = np.exp(growth * dt * np.arange(n_steps + 1))
    prices = np.tile(level * factors[None, :, None], (n_paths, 1, 1))
    return h.PathSet(prices, grid)


BASIS1 = h.BasisSpec(degree=2, n_assets=1)


class TestPriceEuropean:
    def test_deterministic_world_exact(self):
        # sigma = 0: value is the discounted intrinsic, local risk vanishes
        paths = constant_paths(level=100.0, growth=0.08, n_steps=65, dt=0.25 / 65)
        res = price_european(paths, call_claim(), BASIS1)
        x_T = paths.prices_at(paths.grid.t_final)[0, 0]
        expected = np.exp(-0.05 * 0.25) * max(x_T - 100.0, 0.0)
        assert np.allclose(res.value_t0, expected, rtol=0, atol=1e-10)
        assert all(st.local_risk < 1e-18 for st in res.stages)

    def test_matches_black_scholes_atm(self):
        paths = gbm_paths()
        res = price_european(paths, call_claim(), BASIS1)
        quote = h.black_scholes_call(100.0, 100.0, 0.05, 0.3, 0.25)
        assert res.value_t0.mean() == pytest.approx(quote.price, abs=0.25)

    def test_two_asset_matches_margrabe(self):
        paths = gbm_paths(sigma=0.3, d=2, n_steps=65, dt=1 / 252, n_paths=10000)
        # per-asset vols 0.3/0.2 need explicit params
        params = h.GbmParams(mu=np.zeros(2), sigma=np.array([0.3, 0.2]),
                             corr=np.eye(2), x0=np.array([100.0, 100.0]))
        paths = h.simulate_gbm(params, paths.grid, n_paths=10000, seed=20240)
        claim = ClaimSpec(kind="european_payoff",
                          payoff=lambda x: np.maximum(x[:, 0] - x[:, 1], 0.0))
        res = price_european(paths, claim, h.BasisSpec(degree=2, n_assets=2))
        quote = h.margrabe(100.0, 100.0, 0.3, 0.2, correlation=0.0, T=65 / 252)
        assert res.value_t0.mean() == pytest.approx(quote.price, abs=0.25)

    def test_drift_insensitivity(self):
        # same shocks, different drift: minimal-martingale value barely moves
        r0 = price_european(gbm_paths(mu=0.0, n_paths=4000), call_claim(), BASIS1)
        r1 = price_european(gbm_paths(mu=0.15, n_paths=4000), call_claim(), BASIS1)
        grid = h.TimeGrid(n_steps=65, dt=0.25 / 65, r=0.05)
        rho = h.discount_factor(grid)
        ses = []
        for paths in (gbm_paths(mu=0.0, n_paths=4000), gbm_paths(mu=0.15, n_paths=4000)):
            pay = rho ** -65 * np.maximum(paths.prices_at(65)[:, 0] - 100.0, 0.0)
            ses.append(pay.std(ddof=1) / np.sqrt(4000))
        combined = float(np.hypot(*ses))
        assert abs(r0.value_t0.mean() - r1.value_t0.mean()) <= 3 * combined

    def test_hedging_cuts_residual_risk(self):
        paths = gbm_paths(n_paths=4000)
        hedged = price_european(paths, call_claim(), BASIS1, use_hedges=True)
        plain = price_european(paths, call_claim(), BASIS1, use_hedges=False)
        total_h = sum(st.local_risk for st in hedged.stages)
        total_p = sum(st.local_risk for st in plain.stages)
        assert total_h <= total_p / 5.0

    def test_stage_residual_means_vanish(self):
        # empirical mean self-financing: cost increments average to zero
        paths = gbm_paths(n_paths=3000, n_steps=12, dt=0.25 / 12)
        res = price_european(paths, call_claim(), BASIS1)
        acct = reconstruct_hedge_account(res, paths)
        incr = np.diff(acct.cost, axis=1)
        for j in range(incr.shape[1]):
            se = incr[:, j].std(ddof=1) / np.sqrt(incr.shape[0])
            assert abs(incr[:, j].mean()) <= max(3 * se, 1e-12)

    def test_wrong_claim_kind(self):
        paths = constant_paths()
        claim = ClaimSpec(kind="real_option", strike=1.0, exercise_window=(0, 1))
        with pytest.raises(ValueError, match="european_payoff"):
            price_european(paths, claim, BASIS1)


class TestProjectValueStream:
    def test_zero_flows(self):
        paths = gbm_paths(n_paths=50, n_steps=6, dt=1.0)
        flows = h.CashFlowSet(np.zeros((50, 7)), paths.grid)
        v = project_value_stream(paths, flows, BASIS1)
        assert not v.any()

    def test_constant_flow_zero_rate(self):
        paths = gbm_paths(n_paths=60, n_steps=9, dt=1.0, r=0.0)
        flows = h.CashFlowSet(np.full((60, 10), 3.0), paths.grid)
        v = project_value_stream(paths, flows, BASIS1)
        for t in range(10):
            assert np.allclose(v[:, t], 3.0 * (10 - t), rtol=1e-10)

    def test_constant_flow_geometric_series(self):
        paths = gbm_paths(n_paths=60, n_steps=9, dt=1.0, r=0.08)
        flows = h.CashFlowSet(np.full((60, 10), 2.0), paths.grid)
        v = project_value_stream(paths, flows, BASIS1)
        rho = h.discount_factor(paths.grid)
        # independent oracle: direct discounted sum
        for t in range(10):
            expected = 2.0 * sum(rho ** -(s - t) for s in range(t, 10))
            assert np.allclose(v[:, t], expected, rtol=1e-9)


def real_option_inputs(n_paths=3000, seed=11):
    grid = h.TimeGrid(n_steps=36, dt=1 / 12, r=0.08)
    params = h.GbmParams(mu=np.array([0.05, 0.02]), sigma=np.array([0.35, 0.3]),
                         corr=np.eye(2), x0=np.array([1200.0, 4.0]))
    paths = h.simulate_gbm(params, grid, n_paths=n_paths, seed=seed)
    spec = h.OracleSpec(kind="clipped_spread", a=1.2895e-4, b_coef=-5.3191e-5,
                        i_run=0.05, noise_std=0.005, noise_seed=77)
    flows = h.generate_cashflows(spec, paths)
    return paths, flows


class TestPriceRealOption:
    def test_single_date_degenerate(self):
        # flows only at the final step make the project value deterministic
        paths = constant_paths(n_paths=10, n_steps=5, r=0.0)
        basis = BASIS1
        for v, strike in ((8.0, 3.0), (2.0, 3.0)):
            flows_arr = np.zeros((10, 6))
            flows_arr[:, -1] = v
            flows = h.CashFlowSet(flows_arr, paths.grid)
            claim = ClaimSpec(kind="real_option", strike=strike, exercise_window=(5, 5))
            res = price_real_option(paths, flows, claim, basis)
            assert np.allclose(res.value_t0, max(v - strike, 0.0), atol=1e-12)
            if v > strike:
                assert len(res.exercise_sets[5]) == 10
                assert res.triggers[5] == pytest.approx(v - strike)
                assert res.exercise_probs[5] == 1.0
            else:
                assert len(res.exercise_sets[5]) == 0
                assert res.triggers[5] is None
                assert res.exercise_probs[5] is None

    def test_zero_strike_floor(self):
        paths, flows = real_option_inputs(n_paths=800)
        claim = ClaimSpec(kind="real_option", strike=0.0, exercise_window=(1, 12))
        res = price_real_option(paths, flows, claim, h.BasisSpec(degree=2, n_assets=2))
        for j, t in enumerate(range(1, 13)):
            intrinsic = res.project_values[:, t] - 0.0
            assert (res.values[:, j] >= np.maximum(intrinsic, 0.0)).all()
        assert (res.value_t0 >= 0.0).all()

    def test_floor_and_dominance(self):
        paths, flows = real_option_inputs()
        basis = h.BasisSpec(degree=2, n_assets=2)
        claim = ClaimSpec(kind="real_option", strike=3.5, exercise_window=(1, 12))
        res = price_real_option(paths, flows, claim, basis)
        # pathwise floor, exact
        for j, t in enumerate(range(1, 13)):
            intrinsic = res.project_values[:, t] - 3.5
            assert (res.values[:, j] >= np.maximum(intrinsic, 0.0)).all()
        # richer exercise set dominates the single terminal date
        terminal = np.maximum(res.project_values[:, 12] - 3.5, 0.0)
        single, _ = regress_backward(paths, terminal, res.basis, t_lo=1, t_hi=12)
        assert res.value_t0.mean() >= single[:, 0].mean() - 1e-9
        # statistics sanity across the window
        for t in range(1, 13):
            prob = res.exercise_probs[t]
            assert (prob is None) == (len(res.exercise_sets[t]) == 0)
            assert (res.triggers[t] is None) == (len(res.exercise_sets[t]) == 0)
            if prob is not None:
                assert 0.0 <= prob <= 1.0

    def test_window_validation(self):
        paths, flows = real_option_inputs(n_paths=400)
        with pytest.raises(ValueError, match="empty"):
            ClaimSpec(kind="real_option", strike=1.0, exercise_window=(12, 1))
        claim = ClaimSpec(kind="real_option", strike=1.0, exercise_window=(1, 99))
        with pytest.raises(ValueError, match="outside"):
            price_real_option(paths, flows, claim, h.BasisSpec(degree=2, n_assets=2))


class TestExerciseStatistics:
    def test_hand_enumerated_fixture(self):
        stats = exercise_statistics(np.array([5.0, -1.0, 3.0]),
                                    np.array([5.0, 2.0, 3.0]),
                                    np.array([4.0, 2.0, 3.0]))
        assert stats.indices.tolist() == [0, 2]
        assert stats.trigger == 3.0
        assert stats.prob == pytest.approx(2 / 3)

    def test_no_exercise(self):
        stats = exercise_statistics(np.array([1.0, 2.0]), np.array([5.0, 5.0]),
                                    np.array([4.0, 4.0]))
        assert stats.indices.size == 0
        assert stats.trigger is None and stats.prob is None

    def test_uniform_exercise(self):
        v = np.full(9, 4.0)
        stats = exercise_statistics(v, v, np.full(9, 1.0))
        assert stats.indices.size == 9
        assert stats.trigger == 4.0
        assert stats.prob == 1.0


class TestQuantileFan:
    def test_degenerate_distribution(self):
        fan = quantile_fan(np.full((10, 3), 7.0), (0.05, 0.5, 0.95))
        assert np.all(fan.quantiles == 7.0)
        assert np.all(fan.mean == 7.0)

    def test_order_statistics_interpolation(self):
        col = np.arange(1.0, 101.0)[:, None]
        fan = quantile_fan(col, (0.05, 0.95))
        assert fan.quantiles[0, 0] == pytest.approx(5.95)
        assert fan.quantiles[1, 0] == pytest.approx(95.05)

    def test_monotone_in_probability(self):
        rng = np.random.default_rng(4)
        fan = quantile_fan(rng.normal(size=(500, 6)), (0.05, 0.5, 0.95))
        assert (fan.quantiles[0] <= fan.quantiles[1]).all()
        assert (fan.quantiles[1] <= fan.quantiles[2]).all()

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            quantile_fan(np.empty((0, 0)), (0.5,))


class TestHedgeAccount:
    def test_zero_claim_all_zero(self):
        paths = gbm_paths(n_paths=200, n_steps=6, dt=1 / 12)
        claim = ClaimSpec(kind="european_payoff", payoff=lambda x: np.zeros(len(x)))
        res = price_european(paths, claim, BASIS1)
        acct = reconstruct_hedge_account(res, paths)
        for arr in (acct.value, acct.gain, acct.cost, acct.orthogonal,
                    acct.numeraire, acct.positions):
            assert np.allclose(arr, 0.0, atol=1e-12)

    def test_deterministic_world_constant_cost(self):
        paths = constant_paths(level=110.0, growth=0.03, n_steps=10)
        res = price_european(paths, call_claim(100.0), BASIS1)
        acct = reconstruct_hedge_account(res, paths)
        assert np.allclose(acct.cost, acct.initial_cost[:, None], atol=1e-10)
        assert np.allclose(acct.orthogonal, 0.0, atol=1e-10)

    def test_binomial_cost_martingale_with_zero_variance(self):
        grid = h.TimeGrid(n_steps=1, dt=1.0, r=0.0)
        x0, u, d = 100.0, 1.2, 0.9
        prices = np.array([[[x0], [u * x0]], [[x0], [d * x0]],
                           [[x0], [u * x0]], [[x0], [d * x0]]])
        paths = h.PathSet(prices, grid)
        claim = ClaimSpec(kind="european_payoff", payoff=lambda x: x[:, 0])
        res = price_european(paths, claim, h.BasisSpec(degree=1, n_assets=1))
        acct = reconstruct_hedge_account(res, paths)
        assert np.allclose(acct.cost[:, 1], acct.cost[:, 0], atol=1e-10)

    def test_identities(self):
        paths = gbm_paths(n_paths=500, n_steps=8, dt=1 / 24)
        res = price_european(paths, call_claim(), BASIS1)
        acct = reconstruct_hedge_account(res, paths)
        assert np.array_equal(acct.cost, acct.value - acct.gain)
        assert not acct.orthogonal[:, 0].any()
        rho = h.discount_factor(paths.grid)
        disc = rho ** -np.arange(paths.grid.n_times)
        recon = acct.value - np.einsum("ntk,ntk->nt", acct.positions,
                                       paths.prices * disc[None, :, None])
        assert np.allclose(acct.numeraire, recon, atol=1e-12)

    def test_requires_full_horizon(self):
        paths, flows = real_option_inputs(n_paths=400)
        claim = ClaimSpec(kind="real_option", strike=3.5, exercise_window=(1, 12))
        res = price_real_option(paths, flows, claim, h.BasisSpec(degree=2, n_assets=2))
        with pytest.raises(ValueError, match="whole grid"):
            reconstruct_hedge_account(res, paths)
