"""Pure numpy/scipy implementations of the GARCH recursion kernels.

The conditional-variance recursion is linear in sigma^2, so the filter can
ride on scipy.signal.lfilter instead of a Python loop; simulation loops
over time only, vectorized across paths.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

_LOG_2PI = float(np.log(2.0 * np.pi))


def garch_filter(returns: np.ndarray, mu: float, omega: float, alpha: float,
                 beta: float, sigma0_sq: float) -> np.ndarray:
    """Conditional variances sigma_t^2 along an observed return series.

    sigma_0^2 = sigma0_sq and sigma_t^2 = omega + alpha*eps_{t-1}^2
    + beta*sigma_{t-1}^2 with eps = returns - mu.
    """
    eps = np.asarray(returns, dtype=np.float64) - mu
    n = eps.shape[0]
    var = np.empty(n)
    var[0] = sigma0_sq
    if n > 1:
        drive = omega + alpha * eps[:-1] ** 2
        var[1:] = lfilter([1.0], [1.0, -beta], drive, zi=np.array([beta * sigma0_sq]))[0]
    return var


def garch_neg_loglik(returns: np.ndarray, mu: float, omega: float, alpha: float,
                     beta: float, sigma0_sq: float) -> float:
    """Negative Gaussian quasi-log-likelihood of a GARCH(1,1) fit."""
    eps = np.asarray(returns, dtype=np.float64) - mu
    var = garch_filter(returns, mu, omega, alpha, beta, sigma0_sq)
    if not (var > 0.0).all():
        return np.inf
    return float(0.5 * np.sum(_LOG_2PI + np.log(var) + eps * eps / var))


def garch_simulate(shocks: np.ndarray, mu: float, omega: float, alpha: float,
                   beta: float, sigma0_sq: float) -> np.ndarray:
    """Log returns from standardized shocks (n_paths, n_steps).

    The first step uses sigma0_sq as its conditional variance; later steps
    follow the recursion. Returns an array of the same shape as shocks.
    """
    z = np.asarray(shocks, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"shocks must be 2-d (n_paths, n_steps), got shape {z.shape}")
    n_paths, n_steps = z.shape
    out = np.empty_like(z)
    var = np.full(n_paths, float(sigma0_sq))
    for t in range(n_steps):
        eps = np.sqrt(var) * z[:, t]
        out[:, t] = mu + eps
        var = omega + alpha * eps * eps + beta * var
    return out
