"""
GJR-GARCH(1,1) with standardized Student-t innovations and zero mean.

Estimation maximizes the likelihood with Nelder-Mead over an unconstrained
parameterization:

    omega = exp(theta0)
    (alpha, gamma / 2, beta, slack) = softmax(theta1, theta2, theta3, 0)
    nu = 2 + (NU_MAX - 2) * sigmoid(theta4)

so omega > 0, alpha + gamma / 2 + beta < 1 and 2 < nu < NU_MAX hold for
every theta. Returns are scaled to unit sample variance while fitting.

Once the ARCH terms vanish the likelihood is flat along omega + beta = 1, so
the search also starts from low-persistence points and, among fits the
likelihood cannot tell apart, keeps the least persistent one.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy import optimize, signal, stats
from scipy.special import expit, gammaln, logit, logsumexp

from src.config import BaselineConfig
from src.utils.logger import get_logger

logger = get_logger(__name__)

INIT_ALPHA = 0.05
INIT_GAMMA = 0.05
INIT_BETA = 0.85
INIT_NU = 8.0
INIT_OMEGA_FRACTION = 0.1 * (1.0 - 0.9)
PENALTY = 1e10
NU_MAX = 200.0

# (alpha, gamma, beta) of the extra starts, omega set to the unit variance level
RESTARTS = ((0.02, 0.02, 0.5), (1e-3, 1e-3, 1e-3))

# half the 1% chi-square(2) critical value: likelihood gaps the two ARCH terms cannot explain
TIE_TOLERANCE = 0.5 * float(stats.chi2.ppf(0.99, 2))


@dataclass(frozen=True)
class GjrGarchParams:
    omega: float
    alpha_arch: float
    gamma_lev: float
    beta_garch: float
    nu: float

    @property
    def persistence(self) -> float:
        return self.alpha_arch + self.gamma_lev / 2.0 + self.beta_garch


@dataclass(frozen=True)
class GarchState:
    """Conditional variance of the next unobserved return."""

    variance: float
    last_return: Optional[float] = None
    last_date: Optional[pd.Timestamp] = None


@dataclass(frozen=True)
class GarchFit:
    params: GjrGarchParams
    converged: bool
    n_obs: int
    neg_loglik: float
    sample_variance: float


def _to_params(theta: np.ndarray, scale: float = 1.0) -> GjrGarchParams:
    logits = np.array([theta[1], theta[2], theta[3], 0.0])
    weights = np.exp(logits - logsumexp(logits))
    return GjrGarchParams(
        omega=float(np.exp(theta[0]) * scale),
        alpha_arch=float(weights[0]),
        gamma_lev=float(2.0 * weights[1]),
        beta_garch=float(weights[2]),
        nu=float(2.0 + (NU_MAX - 2.0) * expit(theta[4])),
    )


def _to_theta(params: GjrGarchParams, scale: float = 1.0) -> np.ndarray:
    slack = 1.0 - params.persistence
    return np.array(
        [
            np.log(params.omega / scale),
            np.log(params.alpha_arch / slack),
            np.log(params.gamma_lev / 2.0 / slack),
            np.log(params.beta_garch / slack),
            logit((params.nu - 2.0) / (NU_MAX - 2.0)),
        ]
    )


def conditional_variances(returns: np.ndarray, params: GjrGarchParams, variance0: float) -> np.ndarray:
    """sigma^2_t for every return, seeded with sigma^2_0 = variance0."""
    r2 = returns[:-1] ** 2
    drive = params.omega + (params.alpha_arch + params.gamma_lev * (returns[:-1] < 0)) * r2
    rest, _ = signal.lfilter([1.0], [1.0, -params.beta_garch], drive, zi=[params.beta_garch * variance0])
    return np.concatenate([[variance0], rest])


def student_t_nll(returns: np.ndarray, params: GjrGarchParams, variance0: float) -> float:
    """Negative log-likelihood of zero-mean returns with unit-variance t innovations."""
    sigma2 = conditional_variances(returns, params, variance0)
    if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0):
        return PENALTY
    nu = params.nu
    const = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * np.log(np.pi * (nu - 2.0))
    loglik = const - 0.5 * np.log(sigma2) - (nu + 1.0) / 2.0 * np.log1p(returns**2 / (sigma2 * (nu - 2.0)))
    total = float(np.sum(loglik))
    return -total if np.isfinite(total) else PENALTY


def initial_params(sample_variance: float) -> GjrGarchParams:
    return GjrGarchParams(
        omega=INIT_OMEGA_FRACTION * sample_variance,
        alpha_arch=INIT_ALPHA,
        gamma_lev=INIT_GAMMA,
        beta_garch=INIT_BETA,
        nu=INIT_NU,
    )


def restart_params(alpha_arch: float, gamma_lev: float, beta_garch: float) -> GjrGarchParams:
    """Start whose unconditional variance is 1 (the scaled series' level)."""
    persistence = alpha_arch + gamma_lev / 2.0 + beta_garch
    return GjrGarchParams(
        omega=1.0 - persistence,
        alpha_arch=alpha_arch,
        gamma_lev=gamma_lev,
        beta_garch=beta_garch,
        nu=INIT_NU,
    )


def _search(objective, start: np.ndarray, options: dict) -> optimize.OptimizeResult:
    result = optimize.minimize(objective, start, method="Nelder-Mead", options=options)
    if not result.success:
        # continue once from the last simplex vertex
        result = optimize.minimize(objective, result.x, method="Nelder-Mead", options=options)
    return result


def select_fit(results: List[optimize.OptimizeResult], ceiling: float) -> Optional[optimize.OptimizeResult]:
    """
    Least persistent result within TIE_TOLERANCE of the best likelihood.

    Only results that are finite and beat ``ceiling`` compete; None if none does.
    """
    usable = [res for res in results if np.all(np.isfinite(res.x)) and res.fun < ceiling]
    if not usable:
        return None
    best = min(res.fun for res in usable)
    tied = [res for res in usable if res.fun <= best + TIE_TOLERANCE]
    return min(tied, key=lambda res: _to_params(res.x).persistence)


def fit_gjr_garch(returns: np.ndarray, config: BaselineConfig = BaselineConfig()) -> Optional[GarchFit]:
    """
    Fit the model to a training return series.

    Missing returns are dropped. Returns None below ``garch_min_obs``
    observations. The simplex search runs from the fixed initialization and
    from each of RESTARTS. If no search improves on the initialization it is
    returned with ``converged=False``. A chosen search that stopped on its
    iteration budget keeps its estimate, also flagged ``converged=False``.
    """
    r = np.asarray(returns, dtype=float)
    r = r[~np.isnan(r)]
    if r.size < config.garch_min_obs:
        return None

    sample_variance = float(np.var(r, ddof=1))
    if sample_variance <= 0:
        logger.warning("Flat GARCH training returns; using initialization point")
        init = initial_params(max(sample_variance, 1e-12))
        return GarchFit(init, False, int(r.size), float("nan"), sample_variance)

    scale = sample_variance
    x = r / np.sqrt(scale)
    start = _to_theta(initial_params(1.0))

    def objective(theta: np.ndarray) -> float:
        return student_t_nll(x, _to_params(theta), 1.0)

    options = {"maxiter": config.garch_maxiter, "maxfev": 2 * config.garch_maxiter, "xatol": 1e-6, "fatol": 1e-8}
    starts = [start] + [_to_theta(restart_params(*point)) for point in RESTARTS]
    results = [_search(objective, s, options) for s in starts]

    result = select_fit(results, min(objective(start), PENALTY))
    if result is None:
        logger.warning(f"GJR-GARCH fit did not converge ({results[0].message}); using initialization point")
        return GarchFit(initial_params(sample_variance), False, int(r.size), float("nan"), sample_variance)

    if not result.success:
        logger.warning(f"GJR-GARCH search stopped early ({result.message}); keeping the improved estimate")

    params = _to_params(result.x, scale)
    neg_loglik = float(result.fun) + 0.5 * r.size * np.log(scale)
    return GarchFit(params, bool(result.success), int(r.size), neg_loglik, sample_variance)


def garch_step(
    params: GjrGarchParams,
    state: GarchState,
    observed_return: Optional[float],
    date: Optional[pd.Timestamp] = None,
) -> GarchState:
    """One GJR recursion step; a missing return leaves the variance unchanged."""
    if observed_return is None or np.isnan(observed_return):
        return GarchState(variance=state.variance, last_return=state.last_return, last_date=date or state.last_date)
    leverage = params.gamma_lev if observed_return < 0 else 0.0
    variance = (
        params.omega
        + (params.alpha_arch + leverage) * observed_return**2
        + params.beta_garch * state.variance
    )
    return GarchState(variance=variance, last_return=observed_return, last_date=date)


def roll_forward(params: GjrGarchParams, returns: np.ndarray, variance0: float) -> GarchState:
    """State after running the recursion over a return series from sigma^2 = variance0."""
    state = GarchState(variance=variance0)
    for r in np.asarray(returns, dtype=float):
        state = garch_step(params, state, r)
    return state


def standardized_t_quantile(alpha: float, nu: float) -> float:
    """alpha-quantile of a unit-variance Student-t."""
    return float(stats.t.ppf(alpha, nu) * np.sqrt((nu - 2.0) / nu))


def garch_var(params: GjrGarchParams, state: GarchState, alpha: float) -> float:
    """sigma_{t+1} * t_nu^{-1}(alpha) * sqrt((nu - 2) / nu)."""
    return float(np.sqrt(state.variance)) * standardized_t_quantile(alpha, params.nu)
