"""Closed-form validation oracles: normal CDF, Black-Scholes call, Margrabe exchange."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = ["AnalyticQuote", "norm_cdf", "black_scholes_call", "margrabe"]


@dataclass(frozen=True)
class AnalyticQuote:
    """Closed-form price with partial derivatives w.r.t. each spot."""

    price: float
    deltas: tuple[float, ...]


def norm_cdf(x):
    """Standard normal CDF via the complementary error function.

    scipy.special.ndtr evaluates Phi(x) = erfc(-x/sqrt(2))/2 with the
    standard rational erfc approximation, accurate well below 1e-12
    absolute over the real line. Accepts scalars or arrays.
    """
    out = ndtr(x)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def black_scholes_call(spot: float, strike: float, r: float, sigma: float, T: float) -> AnalyticQuote:
    """European call price and spot delta.

    sigma = 0 or T = 0 degenerate to discounted intrinsic value: the price
    is exp(-rT) * (spot*exp(rT) - strike)^+ and the delta steps at the
    forward-at-the-money point.
    """
    if spot <= 0.0 or strike <= 0.0:
        raise ValueError(f"spot and strike must be positive, got spot={spot}, strike={strike}")
    if sigma < 0.0 or T < 0.0:
        raise ValueError(f"sigma and T must be nonnegative, got sigma={sigma}, T={T}")
    if sigma == 0.0 or T == 0.0:
        forward = spot * math.exp(r * T)
        price = math.exp(-r * T) * max(forward - strike, 0.0)
        delta = 1.0 if forward > strike else 0.0
        return AnalyticQuote(price=price, deltas=(delta,))
    st = sigma * math.sqrt(T)
    d1 = (math.log(spot / strike) + (r + 0.5 * sigma * sigma) * T) / st
    d2 = d1 - st
    price = spot * norm_cdf(d1) - strike * math.exp(-r * T) * norm_cdf(d2)
    return AnalyticQuote(price=float(price), deltas=(float(norm_cdf(d1)),))


def margrabe(spot1: float, spot2: float, sigma1: float, sigma2: float,
             correlation: float = 0.0, T: float = 0.0) -> AnalyticQuote:
    """Exchange option (receive asset 1, deliver asset 2) closed form.

    Composite volatility sigma = sqrt(sigma1^2 + sigma2^2
    - 2*correlation*sigma1*sigma2); the default correlation 0 treats the
    two drivers as independent. The price does not depend on the rate.
    """
    if spot1 <= 0.0 or spot2 <= 0.0:
        raise ValueError(f"spots must be positive, got {spot1}, {spot2}")
    if sigma1 < 0.0 or sigma2 < 0.0 or T < 0.0:
        raise ValueError("volatilities and T must be nonnegative")
    if not -1.0 <= correlation <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {correlation}")
    comp_var = sigma1 * sigma1 + sigma2 * sigma2 - 2.0 * correlation * sigma1 * sigma2
    sigma = math.sqrt(max(comp_var, 0.0))
    if sigma == 0.0 or T == 0.0:
        price = max(spot1 - spot2, 0.0)
        step = 1.0 if spot1 > spot2 else 0.0
        return AnalyticQuote(price=price, deltas=(step, -step))
    st = sigma * math.sqrt(T)
    d1 = (math.log(spot1 / spot2) + 0.5 * sigma * sigma * T) / st
    d2 = d1 - st
    price = spot1 * norm_cdf(d1) - spot2 * norm_cdf(d2)
    return AnalyticQuote(price=float(price),
                         deltas=(float(norm_cdf(d1)), float(-norm_cdf(d2))))
