"""Monomial value basis and its gradient hedge basis.

The value function is expanded over scaled monomials of the asset prices;
the hedge functions use the derivatives of the same elements, so one
coefficient per (element, asset) fully describes the hedge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

__all__ = ["BasisSpec", "eval_value_basis", "eval_hedge_basis", "resolve_scaling"]

FAMILIES = ("monomial",)


@dataclass(frozen=True)
class BasisSpec:
    """Configuration of the regression basis.

    ``tensor=True`` takes the full tensor product of per-dimension powers,
    b = (degree+1)**d elements; ``tensor=False`` keeps the constant plus
    pure powers of each asset, b = d*degree + 1 (caps growth for large d).
    ``scaling`` holds per-asset positive scale factors; prices are divided
    by it before evaluation to keep design matrices well conditioned.
    ``scaling=None`` means "resolve from data" (cross-path mean at the
    first grid time, see resolve_scaling).
    """

    degree: int
    n_assets: int
    family: str = "monomial"
    tensor: bool = True
    scaling: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown basis family {self.family!r}, expected one of {FAMILIES}")
        if int(self.degree) != self.degree or self.degree < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {self.degree}")
        if int(self.n_assets) != self.n_assets or self.n_assets < 1:
            raise ValueError(f"n_assets must be a positive integer, got {self.n_assets}")
        if self.scaling is not None:
            s = np.atleast_1d(np.asarray(self.scaling, dtype=np.float64)).copy()
            if s.shape != (self.n_assets,):
                raise ValueError(f"scaling must have {self.n_assets} entries, got shape {s.shape}")
            if not (np.isfinite(s).all() and (s > 0.0).all()):
                raise ValueError("scaling factors must be positive and finite")
            s.setflags(write=False)
            object.__setattr__(self, "scaling", s)

    @property
    def n_elements(self) -> int:
        if self.tensor:
            return (self.degree + 1) ** self.n_assets
        return self.n_assets * self.degree + 1

    def exponents(self) -> list[tuple[int, ...]]:
        """Exponent tuple of each element, in the declared ordering.

        Tensor mode enumerates itertools.product(range(degree+1), repeat=d):
        the last asset's exponent varies fastest, e.g. degree=1, d=2 gives
        (1, x2, x1, x1*x2). Additive mode lists the constant, then powers
        1..degree of asset 1, then of asset 2, and so on.
        """
        d, deg = self.n_assets, self.degree
        if self.tensor:
            return list(itertools.product(range(deg + 1), repeat=d))
        out = [(0,) * d]
        for k in range(d):
            for p in range(1, deg + 1):
                e = [0] * d
                e[k] = p
                out.append(tuple(e))
        return out


def resolve_scaling(spec: BasisSpec, paths) -> BasisSpec:
    """Fill in scaling=None with the cross-path mean price at the first grid time."""
    if spec.scaling is not None:
        return spec
    if paths.n_assets != spec.n_assets:
        raise ValueError(f"basis expects {spec.n_assets} assets, paths have {paths.n_assets}")
    means = paths.prices[:, 0, :].mean(axis=0)
    return replace(spec, scaling=means)


def _prepare(spec: BasisSpec, x: np.ndarray) -> tuple[np.ndarray, bool]:
    if spec.scaling is None:
        raise ValueError("basis scaling is unresolved; call resolve_scaling first or set it explicitly")
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != spec.n_assets:
        raise ValueError(f"expected points of dimension {spec.n_assets}, got shape {np.shape(x)}")
    if not np.isfinite(arr).all():
        raise ValueError("non-finite evaluation point")
    return arr / spec.scaling, single


def _powers(xs: np.ndarray, degree: int) -> np.ndarray:
    # (N, d, degree+1) table of xs**p
    return xs[:, :, None] ** np.arange(degree + 1)


def eval_value_basis(spec: BasisSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate the value basis at one point (d,) or a batch (N, d).

    Returns (b,) for a single point, (N, b) for a batch, elements ordered
    per BasisSpec.exponents().
    """
    xs, single = _prepare(spec, x)
    pw = _powers(xs, spec.degree)
    cols = [pw[:, range(spec.n_assets), e].prod(axis=1) for e in spec.exponents()]
    out = np.stack(cols, axis=1)
    return out[0] if single else out


def eval_hedge_basis(spec: BasisSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate the hedge basis: gradients of the value elements.

    Entry (a, k) is d(K_a)/d(x_k) at the scaled point, including the
    1/scaling_k chain-rule factor, so hedge values carry units of
    (claim currency)/(asset-k currency). Returns (b, d) or (N, b, d).
    """
    xs, single = _prepare(spec, x)
    d, deg = spec.n_assets, spec.degree
    pw = _powers(xs, deg)
    exps = spec.exponents()
    out = np.zeros((xs.shape[0], len(exps), d))
    for a, e in enumerate(exps):
        for k in range(d):
            if e[k] == 0:
                continue
            col = np.full(xs.shape[0], e[k] / spec.scaling[k])
            for j in range(d):
                p = e[j] - 1 if j == k else e[j]
                if p:
                    col = col * pw[:, j, p]
            out[:, a, k] = col
    return out[0] if single else out
