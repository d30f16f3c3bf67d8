"""Backward-induction valuation on simulated paths.

European claims: regress the discounted successor value jointly on the
value basis and hedge-weighted price moves, step back to the start.
Cash-flow streams: same recursion with the flow at each step accrued on
top of the fitted continuation. Investment (real) options: Bermudan
recursion over the exercise window, flooring the fitted continuation by
the intrinsic value and recording per-step exercise statistics (exercise
set, trigger level, trigger probability).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import BasisSpec, eval_hedge_basis, eval_value_basis, resolve_scaling
from .core import CashFlowSet, PathSet, discount_factor, validate_aligned
from .regress import StageRegression, stage_regression

__all__ = [
    "ClaimSpec",
    "ExerciseStats",
    "ValuationResult",
    "HedgeAccount",
    "QuantileFan",
    "regress_backward",
    "price_european",
    "project_value_stream",
    "price_real_option",
    "exercise_statistics",
    "reconstruct_hedge_account",
    "quantile_fan",
]

CLAIM_KINDS = ("european_payoff", "stream_value", "real_option")


@dataclass(frozen=True)
class ClaimSpec:
    """What is being valued.

    european_payoff: `payoff` maps terminal prices (N, d) -> (N,) payoffs.
    real_option: pay `strike` (the investment cost) at any step in
    `exercise_window` = (first, last), inclusive, to receive the project's
    remaining cash-flow stream.
    """

    kind: str
    payoff: Callable[[np.ndarray], np.ndarray] | None = None
    strike: float = 0.0
    exercise_window: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in CLAIM_KINDS:
            raise ValueError(f"unknown claim kind {self.kind!r}, expected one of {CLAIM_KINDS}")
        if self.strike < 0.0:
            raise ValueError(f"strike must be nonnegative, got {self.strike}")
        if self.kind == "european_payoff" and self.payoff is None:
            raise ValueError("european_payoff claim needs a payoff function")
        if self.kind == "real_option":
            if self.exercise_window is None:
                raise ValueError("real_option claim needs an exercise_window (first, last)")
            lo, hi = self.exercise_window
            if lo > hi:
                raise ValueError(f"exercise window is empty: first={lo} > last={hi}")


@dataclass(frozen=True)
class ExerciseStats:
    """Exercise set, trigger level and trigger probability at one step.

    `indices` are 0-based path indices where immediate exercise is optimal.
    `trigger` is the smallest intrinsic value among them (None when the set
    is empty, never coerced to zero) and `prob` the fraction of paths whose
    clipped intrinsic value lies at or below the trigger.
    """

    indices: np.ndarray
    trigger: float | None
    prob: float | None


@dataclass(frozen=True)
class ValuationResult:
    """Output of a valuation run.

    `values[:, j]` holds the per-path option value at step window[0] + j;
    for real options these are the raised (post-comparison) values that
    feed the recursion. `stages` covers window[0] .. window[1]-1 in
    ascending order. Real-option runs also carry the project-value matrix
    over the full grid and the per-step exercise statistics keyed by
    absolute step index.
    """

    kind: str
    window: tuple[int, int]
    value_t0: np.ndarray
    values: np.ndarray
    stages: list[StageRegression]
    basis: BasisSpec
    project_values: np.ndarray | None = None
    exercise_sets: dict[int, np.ndarray] | None = None
    triggers: dict[int, float | None] | None = None
    exercise_probs: dict[int, float | None] | None = None


@dataclass(frozen=True)
class HedgeAccount:
    """Per-path hedging ledger reconstructed from the stage regressions.

    All monetary series (value, gain, cost, orthogonal, numeraire) are in
    start-date currency, i.e. discounted at the risk-free rate, matching
    the units in which the stage regressions minimize risk. `positions[:,
    t, :]` is the hedge held over (t-1, t], decided at t-1; row 0 is zero
    (all wealth starts in the numeraire). Identities, exact by
    construction: cost = value - gain, orthogonal[:, 0] = 0, numeraire =
    value - positions . discounted prices.
    """

    value: np.ndarray
    gain: np.ndarray
    cost: np.ndarray
    orthogonal: np.ndarray
    numeraire: np.ndarray
    positions: np.ndarray
    initial_cost: np.ndarray


@dataclass(frozen=True)
class QuantileFan:
    """Per-time empirical quantiles and mean of an (N, n_times) matrix."""

    probs: tuple[float, ...]
    quantiles: np.ndarray  # (len(probs), n_times)
    mean: np.ndarray  # (n_times,)


def _fitted(basis: BasisSpec, stage: StageRegression, x: np.ndarray) -> np.ndarray:
    return eval_value_basis(basis, x) @ stage.gamma


def regress_backward(
    paths: PathSet,
    terminal_values: np.ndarray,
    basis: BasisSpec,
    t_lo: int | None = None,
    t_hi: int | None = None,
    use_hedges: bool = True,
) -> tuple[np.ndarray, list[StageRegression]]:
    """Roll fitted values back from `t_hi` to `t_lo` without exercise decisions.

    Returns the (N, t_hi - t_lo + 1) matrix of fitted values (terminal
    column included) and the stages in ascending step order. The stage-t
    target is the fitted value at t+1, not the realized successor payoff.
    """
    grid = paths.grid
    t_lo = grid.t0 if t_lo is None else int(t_lo)
    t_hi = grid.t_final if t_hi is None else int(t_hi)
    if not grid.t0 <= t_lo <= t_hi <= grid.t_final:
        raise ValueError(f"[{t_lo}, {t_hi}] is not inside the grid [{grid.t0}, {grid.t_final}]")
    v = np.asarray(terminal_values, dtype=np.float64)
    if v.shape != (paths.n_paths,):
        raise ValueError(f"terminal values must have shape ({paths.n_paths},), got {v.shape}")
    basis = resolve_scaling(basis, paths)
    rho = discount_factor(grid)
    values = np.empty((paths.n_paths, t_hi - t_lo + 1))
    values[:, -1] = v
    stages: list[StageRegression] = []
    for t in range(t_hi - 1, t_lo - 1, -1):
        st = stage_regression(paths.prices_at(t), paths.prices_at(t + 1), v,
                              basis, rho, t=t, use_hedges=use_hedges)
        v = _fitted(basis, st, paths.prices_at(t))
        values[:, t - t_lo] = v
        stages.append(st)
    stages.reverse()
    return values, stages


def price_european(paths: PathSet, claim: ClaimSpec, basis: BasisSpec,
                   use_hedges: bool = True) -> ValuationResult:
    """Value a terminal-payoff claim over the whole grid.

    Initializes with payoff(X_T), then one joint value/hedge regression per
    step back to the grid start. `use_hedges=False` gives the plain
    regression Monte Carlo estimate for comparison.
    """
    if claim.kind != "european_payoff":
        raise ValueError(f"price_european needs a european_payoff claim, got {claim.kind!r}")
    grid = paths.grid
    basis = resolve_scaling(basis, paths)
    terminal = np.asarray(claim.payoff(paths.prices_at(grid.t_final)), dtype=np.float64)
    values, stages = regress_backward(paths, terminal, basis, use_hedges=use_hedges)
    return ValuationResult(
        kind=claim.kind,
        window=(grid.t0, grid.t_final),
        value_t0=values[:, 0],
        values=values,
        stages=stages,
        basis=basis,
    )


def project_value_stream(paths: PathSet, flows: CashFlowSet, basis: BasisSpec,
                         use_hedges: bool = True) -> np.ndarray:
    """Conditional value of the remaining cash-flow stream, per path and step.

    Backward recursion: the value at the final step is that step's flow;
    one step earlier it is the flow accrued at that step plus the fitted
    (hedged) regression of the discounted successor value. The flow at t is
    included in the value at t.
    """
    validate_aligned(paths, flows)
    grid = paths.grid
    basis = resolve_scaling(basis, paths)
    rho = discount_factor(grid)
    out = np.empty_like(flows.flows)
    v = flows.flows[:, -1].copy()
    out[:, -1] = v
    for t in range(grid.t_final - 1, grid.t0 - 1, -1):
        st = stage_regression(paths.prices_at(t), paths.prices_at(t + 1), v,
                              basis, rho, t=t, use_hedges=use_hedges)
        v = flows.flows_at(t) + _fitted(basis, st, paths.prices_at(t))
        out[:, t - grid.t0] = v
    return out


def exercise_statistics(intrinsic: np.ndarray, value: np.ndarray,
                        continuation: np.ndarray) -> ExerciseStats:
    """Exercise set, trigger and trigger probability at one step.

    A path exercises when continuing is worth no more than the clipped
    intrinsic value. The trigger is the minimum unclipped intrinsic value
    over the exercise set; the probability is the fraction of paths whose
    clipped intrinsic value is at or below the trigger (counting
    estimator). Both are None when no path exercises.
    """
    intrinsic = np.asarray(intrinsic, dtype=np.float64)
    value = np.asarray(value, dtype=np.float64)
    continuation = np.asarray(continuation, dtype=np.float64)
    if not intrinsic.shape == value.shape == continuation.shape:
        raise ValueError("intrinsic, value and continuation must share one shape")
    intr_plus = np.maximum(intrinsic, 0.0)
    indices = np.nonzero(continuation <= intr_plus)[0]
    if indices.size == 0:
        return ExerciseStats(indices=indices, trigger=None, prob=None)
    trigger = float(intrinsic[indices].min())
    prob = float(np.mean(intr_plus <= trigger))
    return ExerciseStats(indices=indices, trigger=trigger, prob=prob)


def _terminal_exercise(intrinsic: np.ndarray) -> ExerciseStats:
    # at the last exercise date continuation is worthless: exercise wherever
    # the intrinsic value is strictly positive
    indices = np.nonzero(intrinsic > 0.0)[0]
    if indices.size == 0:
        return ExerciseStats(indices=indices, trigger=None, prob=None)
    trigger = float(intrinsic[indices].min())
    prob = float(np.mean(np.maximum(intrinsic, 0.0) <= trigger))
    return ExerciseStats(indices=indices, trigger=trigger, prob=prob)


def price_real_option(paths: PathSet, flows: CashFlowSet, claim: ClaimSpec,
                      basis: BasisSpec) -> ValuationResult:
    """Value the option to invest `strike` during the exercise window.

    The project value matrix comes from project_value_stream on the full
    grid. At the window's last step the option value is the clipped
    intrinsic value; stepping back, the fitted continuation is compared
    with the intrinsic value, the maximum is kept (and feeds the next
    regression), and the exercise statistics are stored per step.
    """
    if claim.kind != "real_option":
        raise ValueError(f"price_real_option needs a real_option claim, got {claim.kind!r}")
    grid = paths.grid
    t_first, t_last = claim.exercise_window
    if t_first < grid.t0 or t_last > grid.t_final:
        raise ValueError(
            f"exercise window [{t_first}, {t_last}] outside grid [{grid.t0}, {grid.t_final}]"
        )
    basis = resolve_scaling(basis, paths)
    rho = discount_factor(grid)
    proj = project_value_stream(paths, flows, basis)
    strike = claim.strike

    def intrinsic_at(t: int) -> np.ndarray:
        return proj[:, t - grid.t0] - strike

    exercise_sets: dict[int, np.ndarray] = {}
    triggers: dict[int, float | None] = {}
    probs: dict[int, float | None] = {}

    values = np.empty((paths.n_paths, t_last - t_first + 1))
    intr = intrinsic_at(t_last)
    v = np.maximum(intr, 0.0)
    values[:, -1] = v
    stats = _terminal_exercise(intr)
    exercise_sets[t_last], triggers[t_last], probs[t_last] = stats.indices, stats.trigger, stats.prob

    stages: list[StageRegression] = []
    for t in range(t_last - 1, t_first - 1, -1):
        st = stage_regression(paths.prices_at(t), paths.prices_at(t + 1), v,
                              basis, rho, t=t)
        continuation = _fitted(basis, st, paths.prices_at(t))
        intr = intrinsic_at(t)
        v = np.maximum(np.maximum(intr, 0.0), continuation)
        values[:, t - t_first] = v
        stats = exercise_statistics(intr, v, continuation)
        exercise_sets[t], triggers[t], probs[t] = stats.indices, stats.trigger, stats.prob
        stages.append(st)
    stages.reverse()

    return ValuationResult(
        kind=claim.kind,
        window=(t_first, t_last),
        value_t0=values[:, 0],
        values=values,
        stages=stages,
        basis=basis,
        project_values=proj,
        exercise_sets=exercise_sets,
        triggers=triggers,
        exercise_probs=probs,
    )


def reconstruct_hedge_account(result: ValuationResult, paths: PathSet) -> HedgeAccount:
    """Rebuild value/gain/cost/orthogonal/numeraire series from a full-horizon run.

    Requires stages for every step of the grid (a run whose window starts
    at the grid start and ends at the grid end). Gains compound each hedge
    increment at the riskless rate so the cost increments equal the
    discounted stage residuals.
    """
    grid = paths.grid
    if result.window != (grid.t0, grid.t_final) or len(result.stages) != grid.n_steps:
        raise ValueError(
            f"hedge reconstruction needs stages over the whole grid: window {result.window}, "
            f"{len(result.stages)} stages for {grid.n_steps} steps"
        )
    n, n_times, d = paths.n_paths, grid.n_times, paths.n_assets
    rho = discount_factor(grid)
    disc = rho ** -np.arange(n_times)

    positions = np.zeros((n, n_times, d))
    for j, st in enumerate(result.stages):
        h = eval_hedge_basis(result.basis, paths.prices[:, j, :])
        positions[:, j + 1, :] = np.einsum("nak,ak->nk", h, st.psi)

    value = result.values * disc
    gain = np.zeros((n, n_times))
    for j in range(1, n_times):
        move = paths.prices[:, j, :] / rho - paths.prices[:, j - 1, :]
        gain[:, j] = gain[:, j - 1] + disc[j - 1] * np.einsum("nk,nk->n", positions[:, j, :], move)
    cost = value - gain
    initial_cost = cost[:, 0].copy()
    orthogonal = cost - initial_cost[:, None]
    numeraire = value - np.einsum("ntk,ntk->nt", positions, paths.prices * disc[None, :, None])
    return HedgeAccount(value=value, gain=gain, cost=cost, orthogonal=orthogonal,
                        numeraire=numeraire, positions=positions, initial_cost=initial_cost)


def quantile_fan(matrix: np.ndarray, probs) -> QuantileFan:
    """Per-time empirical quantiles (linear interpolation) plus the mean."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"need a nonempty (n_paths, n_times) matrix, got shape {m.shape}")
    p = tuple(float(q) for q in probs)
    if any(not 0.0 <= q <= 1.0 for q in p):
        raise ValueError(f"quantile levels must lie in [0, 1], got {p}")
    return QuantileFan(probs=p, quantiles=np.quantile(m, p, axis=0), mean=m.mean(axis=0))
