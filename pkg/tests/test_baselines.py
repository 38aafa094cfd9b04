"""Historical, EWMA-normal and GJR-GARCH-t baselines."""

import numpy as np
import pandas as pd
import pytest
from scipy import integrate, optimize, stats

from src.baselines import (
    GarchState,
    GjrGarchParams,
    ewma_var,
    fit_gjr_garch,
    garch_step,
    garch_var,
    hist_var,
    roll_forward,
    rolling_hist_var,
)
from src.baselines.garch import (
    NU_MAX,
    PENALTY,
    TIE_TOLERANCE,
    _to_params,
    _to_theta,
    conditional_variances,
    select_fit,
    standardized_t_quantile,
)
from src.config import BaselineConfig

PARAMS = GjrGarchParams(omega=1e-6, alpha_arch=0.05, gamma_lev=0.10, beta_garch=0.85, nu=8.0)


def simulate_gjr(params: GjrGarchParams, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_t(params.nu, size=n) * np.sqrt((params.nu - 2.0) / params.nu)
    variance = params.omega / max(1.0 - params.persistence, 1e-3)
    out = np.empty(n)
    for t in range(n):
        out[t] = np.sqrt(variance) * z[t]
        variance = garch_step(params, GarchState(variance), out[t]).variance
    return out


def test_hist_var_examples():
    assert hist_var([0.003] * 252, 252, 0.05) == pytest.approx(0.003)
    ladder = -0.252 + 0.001 * np.arange(252)
    assert hist_var(ladder, 252, 0.05) == pytest.approx(-0.23945)
    assert hist_var(np.zeros(100), 252, 0.05) is None


def test_hist_var_skips_missing_returns():
    values = np.concatenate([[np.nan] * 5, np.linspace(-0.05, 0.05, 63)])
    assert hist_var(values, 63, 0.05) == pytest.approx(hist_var(values[5:], 63, 0.05))
    assert hist_var(values[:60], 63, 0.05) is None


def test_rolling_hist_var_matches_pointwise():
    rng = np.random.default_rng(0)
    returns = pd.Series(rng.normal(0, 0.01, 200))
    returns[[10, 50, 51, 120]] = np.nan
    rolled = rolling_hist_var(returns, 40, 0.05)
    for t in range(len(returns)):
        expected = hist_var(returns.to_numpy()[: t + 1], 40, 0.05)
        if expected is None:
            assert np.isnan(rolled.iloc[t])
        else:
            assert rolled.iloc[t] == pytest.approx(expected, abs=1e-12)


def test_ewma_var_examples():
    assert ewma_var(0.01) == pytest.approx(-0.0164485)
    assert ewma_var(0.0) == 0.0
    assert ewma_var(0.025) == pytest.approx(-0.04112125, abs=1e-9)
    assert ewma_var(0.01, -2.0) == pytest.approx(-0.02)
    assert ewma_var(None) is None
    assert ewma_var(float("nan")) is None
    with pytest.raises(ValueError):
        ewma_var(-0.01)


def test_garch_step_examples():
    flat = GjrGarchParams(omega=2e-5, alpha_arch=0.0, gamma_lev=0.0, beta_garch=0.0, nu=8.0)
    assert garch_step(flat, GarchState(4e-4), -0.3).variance == pytest.approx(2e-5)

    assert garch_step(PARAMS, GarchState(4e-4), 0.0).variance == pytest.approx(1e-6 + 0.85 * 4e-4)
    assert garch_step(PARAMS, GarchState(4e-4), -0.02).variance == pytest.approx(4.01e-4)
    assert garch_step(PARAMS, GarchState(4e-4), 0.02).variance == pytest.approx(1e-6 + 0.05 * 4e-4 + 0.85 * 4e-4)


def test_missing_return_keeps_variance():
    state = garch_step(PARAMS, GarchState(4e-4, last_return=0.01), float("nan"))
    assert state.variance == 4e-4
    assert state.last_return == 0.01


def test_roll_forward_matches_filtered_variances():
    returns = np.random.default_rng(1).normal(0, 0.01, 50)
    sigma2 = conditional_variances(returns, PARAMS, 1e-4)
    state = roll_forward(PARAMS, returns[:-1], 1e-4)
    assert state.variance == pytest.approx(sigma2[-1], rel=1e-10)


def t_quantile_by_integration(alpha: float, nu: float) -> float:
    def cdf(x: float) -> float:
        return integrate.quad(lambda u: stats.t.pdf(u, nu), -np.inf, x)[0]

    return optimize.brentq(lambda x: cdf(x) - alpha, -50.0, 0.0, xtol=1e-12)


def test_garch_var_student_t_example():
    params = GjrGarchParams(omega=1e-6, alpha_arch=0.05, gamma_lev=0.1, beta_garch=0.85, nu=8.0)
    assert t_quantile_by_integration(0.05, 8.0) == pytest.approx(-1.859548, abs=1e-6)
    assert garch_var(params, GarchState(1e-4), 0.05) == pytest.approx(-0.0161041, abs=1e-7)
    assert garch_var(params, GarchState(0.0), 0.05) == 0.0


def test_garch_var_gaussian_limit():
    params = GjrGarchParams(omega=1e-6, alpha_arch=0.05, gamma_lev=0.1, beta_garch=0.85, nu=1e6)
    assert garch_var(params, GarchState(1e-4), 0.05) == pytest.approx(-1.64485 * 0.01, rel=1e-4)


def test_garch_var_decreases_with_volatility():
    values = [garch_var(PARAMS, GarchState(s**2), 0.05) for s in (0.005, 0.01, 0.02, 0.04)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_standardized_quantile_has_unit_variance_scaling():
    assert standardized_t_quantile(0.05, 8.0) == pytest.approx(stats.t.ppf(0.05, 8.0) * np.sqrt(0.75))


def test_fit_needs_minimum_history():
    assert fit_gjr_garch(np.zeros(100), BaselineConfig(garch_min_obs=250)) is None
    padded = np.concatenate([np.full(200, np.nan), np.random.default_rng(0).normal(0, 0.01, 100)])
    assert fit_gjr_garch(padded, BaselineConfig(garch_min_obs=250)) is None


def test_fit_on_flat_returns_uses_initialization():
    fit = fit_gjr_garch(np.zeros(300))
    assert fit is not None
    assert not fit.converged
    assert fit.params.beta_garch == 0.85


def test_fitted_params_are_stationary():
    returns = simulate_gjr(PARAMS, 1500, seed=2)
    fit = fit_gjr_garch(returns)
    assert fit is not None
    assert fit.params.omega > 0
    assert fit.params.persistence < 1.0
    assert fit.params.nu > 2.0
    assert fit.n_obs == 1500


@pytest.mark.slow
def test_recovers_simulated_parameters():
    fit = fit_gjr_garch(simulate_gjr(PARAMS, 10_000, seed=3))
    assert fit is not None
    assert fit.params.alpha_arch == pytest.approx(0.05, abs=0.05)
    assert fit.params.gamma_lev == pytest.approx(0.10, abs=0.05)
    assert fit.params.beta_garch == pytest.approx(0.85, abs=0.05)
    assert fit.params.nu == pytest.approx(8.0, abs=4.0)


def _result(params: GjrGarchParams, fun: float) -> optimize.OptimizeResult:
    return optimize.OptimizeResult(x=_to_theta(params), fun=fun, success=True)


def test_nu_stays_bounded_for_any_theta():
    for t4 in (-20.0, 0.0, 20.0):
        nu = _to_params(np.array([0.0, -1.0, -1.0, 1.0, t4])).nu
        assert 2.0 < nu <= NU_MAX
    assert _to_params(_to_theta(PARAMS)).nu == pytest.approx(8.0)


def test_select_fit_prefers_least_persistent_among_ties():
    ridge = GjrGarchParams(omega=1e-3, alpha_arch=1e-4, gamma_lev=1e-4, beta_garch=0.99, nu=30.0)
    flat = GjrGarchParams(omega=0.99, alpha_arch=1e-3, gamma_lev=1e-3, beta_garch=1e-3, nu=30.0)
    chosen = select_fit([_result(ridge, 100.0), _result(flat, 100.0 + 0.5 * TIE_TOLERANCE)], PENALTY)
    assert _to_params(chosen.x).beta_garch == pytest.approx(1e-3)


def test_select_fit_keeps_clearly_better_likelihood():
    ridge = GjrGarchParams(omega=1e-3, alpha_arch=0.05, gamma_lev=0.1, beta_garch=0.85, nu=8.0)
    flat = GjrGarchParams(omega=0.99, alpha_arch=1e-3, gamma_lev=1e-3, beta_garch=1e-3, nu=30.0)
    chosen = select_fit([_result(ridge, 100.0), _result(flat, 100.0 + 2.0 * TIE_TOLERANCE)], PENALTY)
    assert _to_params(chosen.x).beta_garch == pytest.approx(0.85)


def test_select_fit_without_improvement():
    flat = GjrGarchParams(omega=0.99, alpha_arch=1e-3, gamma_lev=1e-3, beta_garch=1e-3, nu=30.0)
    assert select_fit([_result(flat, 50.0)], ceiling=40.0) is None
    assert select_fit([optimize.OptimizeResult(x=np.full(5, np.nan), fun=1.0, success=False)], 40.0) is None


@pytest.mark.slow
def test_iid_returns_show_no_arch_effect():
    returns = np.random.default_rng(4).standard_normal(10_000) * 0.01
    fit = fit_gjr_garch(returns)
    assert fit is not None
    assert fit.params.alpha_arch + fit.params.beta_garch < 0.15
    assert fit.params.omega == pytest.approx(fit.sample_variance, rel=0.2)
    assert fit.params.nu <= NU_MAX


@pytest.mark.slow
def test_symmetric_simulation_gives_small_leverage():
    symmetric = GjrGarchParams(omega=1e-6, alpha_arch=0.08, gamma_lev=0.0, beta_garch=0.88, nu=8.0)
    fit = fit_gjr_garch(simulate_gjr(symmetric, 10_000, seed=8))
    assert fit is not None
    assert fit.params.gamma_lev < 0.03
