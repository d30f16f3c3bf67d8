"""Historical-measure scenario generation and calibration.

Covers correlated geometric Brownian motion, GARCH(1,1) quasi-maximum-
likelihood calibration, PCA of the standardized innovations, simulation
from the fitted GARCH+PCA model, and ingestion of historical price CSVs.

Random numbers come from numpy's counter-based Philox generator keyed by
the user seed, so a given (params, grid, n_paths, seed) always produces
bit-identical paths regardless of worker count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._kernels import garch_filter, garch_neg_loglik, garch_simulate
from .core import PathSet, TimeGrid

__all__ = [
    "CorrelationError",
    "CalibrationError",
    "DegenerateSeriesError",
    "GbmParams",
    "GarchParams",
    "GarchCalibration",
    "PcaModel",
    "AlignedPrices",
    "simulate_gbm",
    "calibrate_garch",
    "garch_innovations",
    "fit_pca",
    "simulate_garch_pca",
    "ingest_prices",
    "log_returns",
]

MAX_PERSISTENCE = 0.9999  # alpha + beta is kept strictly below 1


class CorrelationError(ValueError):
    """Correlation matrix is not symmetric positive semidefinite."""


class CalibrationError(RuntimeError):
    """The likelihood search did not converge."""


class DegenerateSeriesError(ValueError):
    """The return series has no variance to fit."""


@dataclass(frozen=True)
class GbmParams:
    """Per-asset annual drift/volatility, cross correlation, initial prices."""

    mu: np.ndarray
    sigma: np.ndarray
    corr: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64))
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=np.float64))
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=np.float64))
        corr = np.atleast_2d(np.asarray(self.corr, dtype=np.float64))
        d = x0.shape[0]
        if mu.shape != (d,) or sigma.shape != (d,) or corr.shape != (d, d):
            raise ValueError(
                f"inconsistent dimensions: mu {mu.shape}, sigma {sigma.shape}, "
                f"corr {corr.shape}, x0 {x0.shape}"
            )
        if not (sigma >= 0.0).all():
            raise ValueError("volatilities must be nonnegative")
        if not (x0 > 0.0).all():
            raise ValueError("initial prices must be strictly positive")
        if not np.allclose(corr, corr.T, atol=1e-12) or not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise CorrelationError("correlation matrix must be symmetric with unit diagonal")
        for a in (mu, sigma, corr, x0):
            a.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "corr", corr)
        object.__setattr__(self, "x0", x0)

    @property
    def n_assets(self) -> int:
        return self.x0.shape[0]


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) parameters of per-period log returns.

    r_t = mu + sigma_t z_t,  sigma_t^2 = omega + alpha eps_{t-1}^2
    + beta sigma_{t-1}^2, with sigma0_sq the conditional variance of the
    first period.
    """

    mu: float
    omega: float
    alpha: float
    beta: float
    sigma0_sq: float

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")
        if not self.alpha + self.beta < 1.0:
            raise ValueError(
                f"alpha + beta = {self.alpha + self.beta} violates covariance stationarity"
            )
        if self.sigma0_sq < 0.0:
            raise ValueError("sigma0_sq must be nonnegative")


@dataclass(frozen=True)
class GarchCalibration:
    params: GarchParams
    log_likelihood: float
    n_obs: int
    n_restarts: int


@dataclass(frozen=True)
class PcaModel:
    """PCA of innovation vectors: row j of `components` is the j-th component."""

    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        comp = np.atleast_2d(np.asarray(self.components, dtype=np.float64))
        var = np.atleast_1d(np.asarray(self.variances, dtype=np.float64))
        d = mean.shape[0]
        if comp.shape != (d, d) or var.shape != (d,):
            raise ValueError("inconsistent PCA dimensions")
        if not np.allclose(comp @ comp.T, np.eye(d), atol=1e-10):
            raise ValueError("components must be orthonormal")
        if (var < -1e-12).any() or (np.diff(var) > 1e-12).any():
            raise ValueError("variances must be nonnegative and sorted descending")
        for a in (mean, comp, var):
            a.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "variances", var)


def _corr_factor(corr: np.ndarray) -> np.ndarray:
    """Matrix L with L @ L.T = corr; tolerates PSD-singular inputs."""
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(corr)
        if (w < -1e-8).any():
            raise CorrelationError(
                f"correlation matrix is not positive semidefinite (min eigenvalue {w.min():.3e})"
            ) from None
        return v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


def simulate_gbm(params: GbmParams, grid: TimeGrid, n_paths: int, seed: int) -> PathSet:
    """Exact-scheme correlated GBM under the historical measure.

    Log increments are Normal((mu - sigma^2/2) dt, sigma^2 dt) with the
    given cross correlation; deterministic for a fixed seed. Two runs that
    differ only in `mu` share their Gaussian shocks for equal seeds.
    """
    d = params.n_assets
    lmat = _corr_factor(params.corr)
    rng = np.random.Generator(np.random.Philox(key=seed))
    z = rng.standard_normal((n_paths, grid.n_steps, d))
    zc = z @ lmat.T
    drift = (params.mu - 0.5 * params.sigma**2) * grid.dt
    incr = drift + params.sigma * math.sqrt(grid.dt) * zc
    logp = np.concatenate(
        [np.zeros((n_paths, 1, d)), np.cumsum(incr, axis=1)], axis=1
    )
    prices = params.x0 * np.exp(logp)
    return PathSet(prices, grid)


def _unpack(theta: np.ndarray) -> tuple[float, float, float, float]:
    # mu free; omega through log; persistence and its alpha/beta split through logistics
    mu = theta[0]
    omega = math.exp(theta[1])
    persistence = MAX_PERSISTENCE / (1.0 + math.exp(-theta[2]))
    split = 1.0 / (1.0 + math.exp(-theta[3]))
    alpha = persistence * split
    beta = persistence * (1.0 - split)
    return mu, omega, alpha, beta


def _pack(mu: float, omega: float, alpha: float, beta: float) -> np.ndarray:
    persistence = min(max(alpha + beta, 1e-6), MAX_PERSISTENCE * (1 - 1e-9))
    split = min(max(alpha / persistence, 1e-9), 1 - 1e-9)
    p = persistence / MAX_PERSISTENCE
    return np.array([
        mu,
        math.log(omega),
        math.log(p / (1.0 - p)),
        math.log(split / (1.0 - split)),
    ])


def calibrate_garch(log_returns: np.ndarray, max_iter: int = 2000,
                    max_restarts: int = 3) -> GarchCalibration:
    """Fit GARCH(1,1) by Gaussian quasi-maximum likelihood.

    Uses a derivative-free Nelder-Mead search on transformed parameters
    (log for omega, logistic for the persistence alpha+beta and its split)
    so the stationarity constraints hold by construction. Starting point:
    mu = sample mean, alpha = 0.05, beta = 0.90, omega targeting the sample
    variance as the unconditional variance. sigma0_sq is pinned to the
    sample variance throughout.

    Raises DegenerateSeriesError on a constant series and CalibrationError
    when no restart converges within `max_iter` iterations.
    """
    r = np.asarray(log_returns, dtype=np.float64).ravel()
    if r.shape[0] < 100 or not np.isfinite(r).all():
        raise ValueError(f"need at least 100 finite observations, got {r.shape[0]}")
    var = float(np.var(r))
    # a constant series leaves only floating-point noise relative to its scale
    if var <= 1e-16 * (float(np.mean(r * r)) + 1e-300):
        raise DegenerateSeriesError("return series has zero variance")

    sigma0_sq = var
    alpha0, beta0 = 0.05, 0.90
    omega0 = max(var * (1.0 - alpha0 - beta0), 1e-12)
    theta = _pack(float(np.mean(r)), omega0, alpha0, beta0)

    def objective(th: np.ndarray) -> float:
        try:
            mu, omega, alpha, beta = _unpack(th)
        except OverflowError:
            return 1e308
        val = garch_neg_loglik(r, mu, omega, alpha, beta, sigma0_sq)
        return val if np.isfinite(val) else 1e308

    best = None
    converged = False
    runs = 0
    for _ in range(max_restarts + 1):
        runs += 1
        res = minimize(objective, theta, method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": 1e-8, "fatol": 1e-10})
        converged = converged or bool(res.success)
        improved = best is None or res.fun < best.fun - 1e-8 * (1.0 + abs(best.fun))
        if best is None or res.fun < best.fun:
            best = res
        theta = best.x
        if converged and not improved:
            break
    if not converged:
        raise CalibrationError(
            f"simplex search did not converge after {runs} runs of {max_iter} iterations"
        )
    mu, omega, alpha, beta = _unpack(best.x)
    params = GarchParams(mu=mu, omega=omega, alpha=alpha, beta=beta, sigma0_sq=sigma0_sq)
    return GarchCalibration(params=params, log_likelihood=-float(best.fun),
                            n_obs=r.shape[0], n_restarts=runs - 1)


def garch_innovations(log_returns: np.ndarray, params: GarchParams) -> np.ndarray:
    """Standardized residuals z_t = (r_t - mu)/sigma_t under fitted parameters."""
    r = np.asarray(log_returns, dtype=np.float64).ravel()
    var = garch_filter(r, params.mu, params.omega, params.alpha, params.beta, params.sigma0_sq)
    return (r - params.mu) / np.sqrt(var)


def fit_pca(innovations: np.ndarray) -> PcaModel:
    """Eigen-decomposition of the innovation sample covariance.

    Components come back orthonormal with variances sorted descending;
    each component's sign is fixed so its largest-magnitude entry is
    positive, keeping the decomposition deterministic.
    """
    x = np.asarray(innovations, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"innovations must be 2-d (T, d), got shape {x.shape}")
    t_len, d = x.shape
    if t_len <= d:
        raise ValueError(f"need more observations than dimensions, got T={t_len}, d={d}")
    mean = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1).reshape(d, d)
    w, v = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1]
    w = np.clip(w[order], 0.0, None)
    v = v[:, order]
    for j in range(d):
        if v[np.argmax(np.abs(v[:, j])), j] < 0:
            v[:, j] = -v[:, j]
    return PcaModel(mean=mean, components=v.T, variances=w)


def simulate_garch_pca(
    garch: list[GarchParams],
    pca: PcaModel,
    grid: TimeGrid,
    n_paths: int,
    initial_prices: np.ndarray,
    seed: int,
) -> PathSet:
    """Simulate correlated GARCH(1,1) paths from a PCA innovation model.

    Component scores are drawn independently Normal(0, component variance),
    mapped through the PCA basis to per-asset standardized innovations, and
    fed to each asset's variance recursion. Deterministic per seed.
    """
    x0 = np.atleast_1d(np.asarray(initial_prices, dtype=np.float64))
    d = len(garch)
    if pca.mean.shape[0] != d or x0.shape[0] != d:
        raise ValueError(
            f"dimension mismatch: {d} GARCH models, PCA dim {pca.mean.shape[0]}, "
            f"{x0.shape[0]} initial prices"
        )
    if not (x0 > 0.0).all():
        raise ValueError("initial prices must be strictly positive")
    rng = np.random.Generator(np.random.Philox(key=seed))
    scores = rng.standard_normal((n_paths, grid.n_steps, d)) * np.sqrt(pca.variances)
    z = scores @ pca.components + pca.mean
    rets = np.empty((n_paths, grid.n_steps, d))
    for k in range(d):
        p = garch[k]
        rets[:, :, k] = garch_simulate(
            np.ascontiguousarray(z[:, :, k]), p.mu, p.omega, p.alpha, p.beta, p.sigma0_sq
        )
    logp = np.concatenate(
        [np.zeros((n_paths, 1, d)), np.cumsum(rets, axis=1)], axis=1
    )
    prices = x0 * np.exp(logp)
    return PathSet(prices, grid)


@dataclass(frozen=True)
class AlignedPrices:
    """Date-aligned historical prices: inner join over the input files."""

    dates: tuple[str, ...]
    prices: np.ndarray  # (T, d)
    names: tuple[str, ...]
    n_dropped: int


def ingest_prices(csv_sources: list) -> AlignedPrices:
    """Load `date,price` CSVs (one file per asset) and align them on dates.

    Dates present in some but not all files are dropped from every series
    (inner join); `n_dropped` counts the distinct dates lost that way.
    """
    series: list[dict[str, float]] = []
    names: list[str] = []
    for src in csv_sources:
        name = str(src)
        names.append(name)
        per: dict[str, float] = {}
        with open(src, "r", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{name}: empty file") from None
            if [h.strip().lower() for h in header[:2]] != ["date", "price"]:
                raise ValueError(f"{name}: expected header 'date,price', got {header!r}")
            for lineno, rec in enumerate(reader, start=2):
                if not rec:
                    continue
                if len(rec) < 2:
                    raise ValueError(f"{name}: line {lineno}: expected 'date,price'")
                date = rec[0].strip()
                try:
                    price = float(rec[1])
                except ValueError:
                    raise ValueError(
                        f"{name}: line {lineno}: non-numeric price {rec[1]!r}"
                    ) from None
                if date in per:
                    raise ValueError(f"{name}: line {lineno}: duplicate date {date}")
                per[date] = price
        if not per:
            raise ValueError(f"{name}: no data rows")
        series.append(per)

    common = set(series[0])
    union = set(series[0])
    for per in series[1:]:
        common &= set(per)
        union |= set(per)
    if not common:
        raise ValueError("no common dates across the input files")
    dates = tuple(sorted(common))
    prices = np.array([[per[dt] for per in series] for dt in dates])
    return AlignedPrices(dates=dates, prices=prices, names=tuple(names),
                         n_dropped=len(union) - len(common))


def log_returns(prices: np.ndarray) -> np.ndarray:
    """Per-period log returns along axis 0."""
    p = np.asarray(prices, dtype=np.float64)
    if (p <= 0).any():
        raise ValueError("prices must be strictly positive to take log returns")
    return np.diff(np.log(p), axis=0)
