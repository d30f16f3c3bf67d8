"""Shared containers: time grids, simulated price paths, cash flows, CSV layouts.

All containers are immutable after construction (arrays are marked
read-only), so they can be shared freely across workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AlignmentError",
    "NonFiniteError",
    "TimeGrid",
    "PathSet",
    "CashFlowSet",
    "discount_factor",
    "validate_aligned",
    "write_pathset_csv",
    "read_pathset_csv",
    "write_cashflows_csv",
    "read_cashflows_csv",
]

# 17 significant digits round-trip any float64 exactly through decimal text
_FLOAT_FMT = "%.17g"


class AlignmentError(ValueError):
    """Paths and cash flows disagree on a shared axis (paths or grid)."""


class NonFiniteError(ValueError):
    """A stored value is NaN or infinite; `location` names the offending entry."""

    def __init__(self, message: str, location: tuple | None = None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid of integer steps with a constant risk-free rate.

    The grid covers integer step indices ``t0 .. t0 + n_steps``; ``dt`` is
    the step length in years and ``r`` the continuously compounded annual
    risk-free rate. Calendar conventions (e.g. 65 trading days = 0.25y)
    are the caller's responsibility: pick (n_steps, dt) explicitly.
    """

    n_steps: int
    dt: float
    r: float = 0.0
    t0: int = 0

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not (self.dt > 0.0) or not math.isfinite(self.dt):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not math.isfinite(self.r):
            raise ValueError(f"r must be finite, got {self.r}")
        if int(self.t0) != self.t0:
            raise ValueError(f"t0 must be an integer step index, got {self.t0}")

    @property
    def n_times(self) -> int:
        return self.n_steps + 1

    @property
    def t_final(self) -> int:
        return self.t0 + self.n_steps

    def step_indices(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + self.n_steps + 1)

    def offset(self, t: int) -> int:
        """Array offset of absolute step index ``t``; bounds-checked."""
        if t < self.t0 or t > self.t_final:
            raise IndexError(f"step {t} outside grid [{self.t0}, {self.t_final}]")
        return int(t) - self.t0


def discount_factor(grid: TimeGrid) -> float:
    """One-step compounding factor exp(r * dt)."""
    return math.exp(grid.r * grid.dt)


def _check_finite(arr: np.ndarray, what: str, with_asset: bool) -> None:
    if np.isfinite(arr).all():
        return
    loc = tuple(int(v) for v in np.argwhere(~np.isfinite(arr))[0])
    if with_asset:
        msg = f"non-finite {what} at (path={loc[0]}, t={loc[1]}, asset={loc[2]})"
    else:
        msg = f"non-finite {what} at (path={loc[0]}, t={loc[1]})"
    raise NonFiniteError(msg, location=loc)


@dataclass(frozen=True)
class PathSet:
    """N simulated price paths of d assets over a shared grid.

    ``prices`` has shape (n_paths, n_times, n_assets), path-major, in
    currency units, undiscounted. When ``positive`` is set all prices
    must be strictly positive.
    """

    prices: np.ndarray
    grid: TimeGrid
    positive: bool = True

    def __post_init__(self):
        arr = np.ascontiguousarray(self.prices, dtype=np.float64)
        if arr.ndim == 2:  # single-asset convenience: (N, T+1) -> (N, T+1, 1)
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"prices must have shape (n_paths, n_times, n_assets), got {arr.shape}")
        if arr.shape[1] != self.grid.n_times:
            raise AlignmentError(
                f"time axis: prices have {arr.shape[1]} time points, grid has {self.grid.n_times}"
            )
        _check_finite(arr, "price", with_asset=True)
        if self.positive and not (arr > 0.0).all():
            loc = tuple(int(v) for v in np.argwhere(~(arr > 0.0))[0])
            raise ValueError(f"non-positive price at (path={loc[0]}, t={loc[1]}, asset={loc[2]})")
        arr.setflags(write=False)
        object.__setattr__(self, "prices", arr)

    @property
    def n_paths(self) -> int:
        return self.prices.shape[0]

    @property
    def n_assets(self) -> int:
        return self.prices.shape[2]

    def prices_at(self, t: int) -> np.ndarray:
        """(n_paths, n_assets) view at absolute step index ``t``."""
        return self.prices[:, self.grid.offset(t), :]


@dataclass(frozen=True)
class CashFlowSet:
    """Per-path, per-time cash flows aligned with a PathSet's grid."""

    flows: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        arr = np.ascontiguousarray(self.flows, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"flows must have shape (n_paths, n_times), got {arr.shape}")
        if arr.shape[1] != self.grid.n_times:
            raise AlignmentError(
                f"time axis: flows have {arr.shape[1]} time points, grid has {self.grid.n_times}"
            )
        _check_finite(arr, "cash flow", with_asset=False)
        arr.setflags(write=False)
        object.__setattr__(self, "flows", arr)

    @property
    def n_paths(self) -> int:
        return self.flows.shape[0]

    def flows_at(self, t: int) -> np.ndarray:
        return self.flows[:, self.grid.offset(t)]


def validate_aligned(paths: PathSet, flows: CashFlowSet) -> tuple[PathSet, CashFlowSet]:
    """Check that a PathSet and a CashFlowSet describe the same scenarios.

    Returns the pair unchanged iff path counts and grids match and all
    entries are finite; raises on the first mismatch found.
    """
    if paths.n_paths != flows.n_paths:
        raise AlignmentError(
            f"path axis: paths have N={paths.n_paths}, flows have N={flows.n_paths}"
        )
    if paths.grid != flows.grid:
        raise AlignmentError(f"grid mismatch: paths {paths.grid} vs flows {flows.grid}")
    _check_finite(paths.prices, "price", with_asset=True)
    _check_finite(flows.flows, "cash flow", with_asset=False)
    return paths, flows


def write_pathset_csv(paths: PathSet, dest) -> None:
    """Write the `path,t,asset_1,...,asset_d` layout, one row per (path, time)."""
    close = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        fh = open(dest, "w", newline="")
        close = True
    else:
        fh = dest
    try:
        d = paths.n_assets
        fh.write("path,t," + ",".join(f"asset_{k + 1}" for k in range(d)) + "\n")
        steps = paths.grid.step_indices()
        for i in range(paths.n_paths):
            for j, t in enumerate(steps):
                row = ",".join(_FLOAT_FMT % v for v in paths.prices[i, j, :])
                fh.write(f"{i},{t},{row}\n")
    finally:
        if close:
            fh.close()


def read_pathset_csv(source, dt: float, r: float = 0.0, positive: bool = True) -> PathSet:
    """Re-ingest the PathSet CSV layout. The grid's dt and r are not stored
    in the file and must be supplied; t0 is inferred from the step indices."""
    rows = _read_csv_rows(source, min_fields=3)
    header = rows[0]
    if header[0] != "path" or header[1] != "t":
        raise ValueError(f"unexpected path CSV header: {header!r}")
    d = len(header) - 2
    data: dict[tuple[int, int], list[float]] = {}
    for lineno, rec in rows[1]:
        try:
            i, t = int(rec[0]), int(rec[1])
            vals = [float(v) for v in rec[2:]]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if len(vals) != d:
            raise ValueError(f"line {lineno}: expected {d} asset columns, got {len(vals)}")
        data[(i, t)] = vals
    if not data:
        raise ValueError("empty path CSV")
    path_ids = sorted({k[0] for k in data})
    ts = sorted({k[1] for k in data})
    t0, t_final = ts[0], ts[-1]
    if path_ids != list(range(len(path_ids))) or ts != list(range(t0, t_final + 1)):
        raise ValueError("path CSV is not rectangular over (path, t)")
    arr = np.empty((len(path_ids), len(ts), d))
    for (i, t), vals in data.items():
        arr[i, t - t0, :] = vals
    grid = TimeGrid(n_steps=t_final - t0, dt=dt, r=r, t0=t0)
    return PathSet(arr, grid, positive=positive)


def write_cashflows_csv(flows: CashFlowSet, dest) -> None:
    """Write the `path,t,cashflow` layout."""
    close = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        fh = open(dest, "w", newline="")
        close = True
    else:
        fh = dest
    try:
        fh.write("path,t,cashflow\n")
        steps = flows.grid.step_indices()
        for i in range(flows.n_paths):
            for j, t in enumerate(steps):
                fh.write(f"{i},{t},{_FLOAT_FMT % flows.flows[i, j]}\n")
    finally:
        if close:
            fh.close()


def read_cashflows_csv(source, dt: float, r: float = 0.0) -> CashFlowSet:
    rows = _read_csv_rows(source, min_fields=3)
    header = rows[0]
    if header[:3] != ["path", "t", "cashflow"]:
        raise ValueError(f"unexpected cashflow CSV header: {header!r}")
    data: dict[tuple[int, int], float] = {}
    for lineno, rec in rows[1]:
        try:
            data[(int(rec[0]), int(rec[1]))] = float(rec[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not data:
        raise ValueError("empty cashflow CSV")
    path_ids = sorted({k[0] for k in data})
    ts = sorted({k[1] for k in data})
    t0, t_final = ts[0], ts[-1]
    if path_ids != list(range(len(path_ids))) or ts != list(range(t0, t_final + 1)):
        raise ValueError("cashflow CSV is not rectangular over (path, t)")
    arr = np.empty((len(path_ids), len(ts)))
    for (i, t), v in data.items():
        arr[i, t - t0] = v
    grid = TimeGrid(n_steps=t_final - t0, dt=dt, r=r, t0=t0)
    return CashFlowSet(arr, grid)


def _read_csv_rows(source, min_fields: int):
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        fh = open(source, "r", newline="")
        close = True
    else:
        fh = source
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty CSV file") from None
        body = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) < min_fields:
                raise ValueError(f"line {lineno}: expected at least {min_fields} fields")
            body.append((lineno, rec))
        return header, body
    finally:
        if close:
            fh.close()
