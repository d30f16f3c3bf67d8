"""Cash-flow oracles: the clipped two-asset spread rule and external CSV streams.

An oracle turns simulated state into per-scenario, per-time project cash
flows. The built-in rule clips an affine spread of two asset prices plus
an unhedgeable noise term into [0, 1]; anything more elaborate (plant
models, optimizers) is fed in through the external CSV layout instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CashFlowSet, PathSet, read_cashflows_csv, validate_aligned

__all__ = ["OracleSpec", "clip_unit", "generate_cashflows"]

KINDS = ("clipped_spread", "external_csv")


@dataclass(frozen=True)
class OracleSpec:
    """Oracle configuration.

    clipped_spread: c = clip_unit(a*X1 - b_coef*X2 - i_run + eps) with
    eps ~ Normal(0, noise_std**2) drawn from a dedicated counter-based
    stream keyed by noise_seed, independent of the path generator.
    external_csv: read flows from `path` in the cashflow CSV layout.
    """

    kind: str
    a: float = 0.0
    b_coef: float = 0.0
    i_run: float = 0.0
    noise_std: float = 0.0
    noise_seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}, expected one of {KINDS}")
        if self.noise_std < 0.0:
            raise ValueError(f"noise_std must be nonnegative, got {self.noise_std}")
        if self.kind == "external_csv" and not self.path:
            raise ValueError("external_csv oracle requires a file path")


def clip_unit(x):
    """Piecewise saturation: 0 for x <= 0, x on (0, 1), 1 for x >= 1."""
    return np.clip(x, 0.0, 1.0)


def generate_cashflows(spec: OracleSpec, paths: PathSet) -> CashFlowSet:
    """Produce the cash-flow matrix matching `paths`.

    Deterministic: the noise stream is keyed by (noise_seed) alone and laid
    out per (path, time), so identical spec and paths always reproduce the
    same CashFlowSet.
    """
    if spec.kind == "external_csv":
        flows = read_cashflows_csv(spec.path, dt=paths.grid.dt, r=paths.grid.r)
        validate_aligned(paths, flows)
        return flows

    if paths.n_assets < 2:
        raise ValueError(
            f"clipped_spread oracle needs at least 2 assets, paths have {paths.n_assets}"
        )
    spread = (
        spec.a * paths.prices[:, :, 0]
        - spec.b_coef * paths.prices[:, :, 1]
        - spec.i_run
    )
    if spec.noise_std > 0.0:
        rng = np.random.Generator(np.random.Philox(key=spec.noise_seed))
        spread = spread + rng.normal(0.0, spec.noise_std, size=spread.shape)
    return CashFlowSet(clip_unit(spread), paths.grid)
