"""Hedged Monte Carlo valuation of real and financial options.

Prices claims by local quadratic-risk minimization on historical-measure
scenarios: each backward step jointly regresses the option value and the
hedge ratios, so prices, hedges, and residual (unhedgeable) risk come out
of the same fit. Includes scenario generation (GBM, GARCH(1,1) + PCA),
closed-form validation oracles, a cash-flow oracle layer, and a CLI.
"""

from ._kernels import BACKEND as kernel_backend
from .analytic import AnalyticQuote, black_scholes_call, margrabe, norm_cdf
from .basis import BasisSpec, eval_hedge_basis, eval_value_basis, resolve_scaling
from .core import (
    AlignmentError,
    CashFlowSet,
    NonFiniteError,
    PathSet,
    TimeGrid,
    discount_factor,
    read_cashflows_csv,
    read_pathset_csv,
    validate_aligned,
    write_cashflows_csv,
    write_pathset_csv,
)
from .engine import (
    ClaimSpec,
    ExerciseStats,
    HedgeAccount,
    QuantileFan,
    ValuationResult,
    exercise_statistics,
    price_european,
    price_real_option,
    project_value_stream,
    quantile_fan,
    reconstruct_hedge_account,
    regress_backward,
)
from .oracle import OracleSpec, clip_unit, generate_cashflows
from .regress import (
    InsufficientPathsError,
    LeastSquaresSolution,
    StageRegression,
    solve_least_squares,
    stage_regression,
)
from .scenarios import (
    AlignedPrices,
    CalibrationError,
    CorrelationError,
    DegenerateSeriesError,
    GarchCalibration,
    GarchParams,
    GbmParams,
    PcaModel,
    calibrate_garch,
    fit_pca,
    garch_innovations,
    ingest_prices,
    log_returns,
    simulate_garch_pca,
    simulate_gbm,
)

__version__ = "0.1.0"
