"""Pivoted-QR least squares and the joint per-stage value/hedge regression.

One overdetermined solve per time step is the hot spot of the whole
valuation, so the solver leans on LAPACK's column-pivoted QR through
scipy and applies an explicit rank cutoff instead of letting collinear
basis columns blow up the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .basis import BasisSpec, eval_hedge_basis, eval_value_basis

__all__ = [
    "InsufficientPathsError",
    "LeastSquaresSolution",
    "StageRegression",
    "solve_least_squares",
    "stage_regression",
    "RANK_RTOL",
]

# columns whose pivoted diagonal falls below this fraction of the largest are dropped
RANK_RTOL = 1e-10


class InsufficientPathsError(ValueError):
    """Fewer paths than regression columns: the stage fit would be underdetermined."""


@dataclass(frozen=True)
class LeastSquaresSolution:
    coefficients: np.ndarray
    residuals: np.ndarray
    rank: int
    residual_sum_squares: float


@dataclass(frozen=True)
class StageRegression:
    """Fitted coefficients of one backward-induction stage.

    ``gamma`` weights the value elements; ``psi[a, k]`` weights hedge
    element a on asset k; ``local_risk`` is the mean squared residual of
    the joint fit (the empirical one-step quadratic hedging error).
    """

    t: int
    gamma: np.ndarray
    psi: np.ndarray
    local_risk: float
    n_paths_used: int


def solve_least_squares(design: np.ndarray, target: np.ndarray) -> LeastSquaresSolution:
    """Minimize ||design @ beta - target||_2 by column-pivoted QR.

    On rank deficiency returns the pivoted basic solution: coefficients of
    dropped (near-dependent) columns are zero and `rank` records how many
    columns were kept.
    """
    a = np.ascontiguousarray(design, dtype=np.float64)
    y = np.ascontiguousarray(target, dtype=np.float64)
    if a.ndim != 2 or y.ndim != 1 or a.shape[0] != y.shape[0]:
        raise ValueError(f"incompatible shapes: design {a.shape}, target {y.shape}")
    n, p = a.shape
    if n < 1 or p < 1:
        raise ValueError("empty system: need at least one row and one column")
    if not np.isfinite(a).all() or not np.isfinite(y).all():
        raise ValueError("non-finite entries in design or target")

    q, r, piv = qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > RANK_RTOL * diag[0]))
    coef = np.zeros(p)
    if rank > 0:
        qty = q.T @ y
        coef_piv = solve_triangular(r[:rank, :rank], qty[:rank])
        coef[piv[:rank]] = coef_piv
    residuals = y - a @ coef
    rss = float(residuals @ residuals)
    return LeastSquaresSolution(coefficients=coef, residuals=residuals, rank=rank,
                                residual_sum_squares=rss)


def stage_regression(
    x_t: np.ndarray,
    x_next: np.ndarray,
    v_next: np.ndarray,
    basis: BasisSpec,
    rho: float,
    t: int = 0,
    use_hedges: bool = True,
) -> StageRegression:
    """Jointly fit the stage value function and hedge ratios.

    Regresses the discounted successor values ``v_next / rho`` on the value
    basis at ``x_t`` and, per asset k, on the hedge basis weighted by the
    discounted price move ``x_next[:, k]/rho - x_t[:, k]``. The fitted value
    function is gamma @ K(x) and the hedge is psi[:, k] @ H(x)[:, k].

    ``use_hedges=False`` drops the hedge block (plain regression Monte
    Carlo); psi comes back as zeros.
    """
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    x_t = np.asarray(x_t, dtype=np.float64)
    x_next = np.asarray(x_next, dtype=np.float64)
    v_next = np.asarray(v_next, dtype=np.float64)
    if x_t.ndim == 1:
        x_t = x_t[:, None]
    if x_next.ndim == 1:
        x_next = x_next[:, None]
    n, d = x_t.shape
    if x_next.shape != (n, d) or v_next.shape != (n,):
        raise ValueError(
            f"misaligned stage inputs: x_t {x_t.shape}, x_next {x_next.shape}, v_next {v_next.shape}"
        )
    b = basis.n_elements
    n_cols = b * (1 + d) if use_hedges else b
    if n < n_cols:
        raise InsufficientPathsError(
            f"stage t={t}: {n} paths for {n_cols} regression columns (need N >= b*(d+1) = {b * (1 + d)})"
        )

    k_block = eval_value_basis(basis, x_t)
    if use_hedges:
        h = eval_hedge_basis(basis, x_t)
        dx = x_next / rho - x_t
        blocks = [k_block] + [h[:, :, k] * dx[:, [k]] for k in range(d)]
        design = np.concatenate(blocks, axis=1)
    else:
        design = k_block
    sol = solve_least_squares(design, v_next / rho)

    gamma = sol.coefficients[:b]
    psi = np.zeros((b, d))
    if use_hedges:
        for k in range(d):
            psi[:, k] = sol.coefficients[b * (1 + k): b * (2 + k)]
    return StageRegression(t=t, gamma=gamma, psi=psi,
                           local_risk=sol.residual_sum_squares / n, n_paths_used=n)
