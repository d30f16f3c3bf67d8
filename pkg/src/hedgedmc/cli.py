"""Configuration-driven command line front end.

One JSON config file describes a pipeline (scenario, claim, oracle, basis,
engine, output); each subcommand runs one pipeline and writes CSV reports
plus optional SVG charts into the output directory. `--set key=value`
overrides nested config keys with dotted paths. Exit codes: 0 success,
1 config/validation error (the diagnostic names the failing section),
2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import charts
from .analytic import black_scholes_call, margrabe
from .basis import FAMILIES, BasisSpec, eval_hedge_basis
from .core import PathSet, TimeGrid, discount_factor, read_pathset_csv, write_pathset_csv
from .engine import ClaimSpec, price_european, price_real_option, quantile_fan
from .oracle import OracleSpec, generate_cashflows
from .scenarios import (
    CalibrationError,
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

__all__ = ["ConfigError", "main"]

_FLOAT_FMT = "%.17g"

COMMANDS = (
    "price-european",
    "price-exchange",
    "price-real-option",
    "simulate",
    "calibrate-garch",
    "validate",
)


class ConfigError(ValueError):
    """Invalid or missing configuration; `section` names the offending key."""

    def __init__(self, section: str, message: str):
        super().__init__(f"config error in section '{section}': {message}")
        self.section = section


# ---------------------------------------------------------------- config


def _load_config(path: str) -> dict:
    with open(path, "r") as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("(root)", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("(root)", "config must be a JSON object")
    return cfg


def _apply_overrides(cfg: dict, overrides: list[str]) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError("(overrides)", f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, f"cannot override through non-object key {part!r}")
        node[parts[-1]] = value


_MISSING = object()


def _get(cfg: dict, path: str, default=_MISSING):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is _MISSING:
                raise ConfigError(path, "missing required key")
            return default
        node = node[part]
    return node


def _vector(value, section: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigError(section, f"expected a number or flat list, got {value!r}")
    return arr


# ---------------------------------------------------------------- builders


def _build_grid(cfg: dict) -> TimeGrid:
    try:
        return TimeGrid(
            n_steps=int(_get(cfg, "scenario.grid.n_steps")),
            dt=float(_get(cfg, "scenario.grid.dt")),
            r=float(_get(cfg, "scenario.grid.r", 0.0)),
            t0=int(_get(cfg, "scenario.grid.t0", 0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("scenario.grid", str(exc)) from None


def _build_paths(cfg: dict, n_paths: int, seed: int) -> PathSet:
    kind = _get(cfg, "scenario.kind", "gbm")
    if kind == "gbm":
        grid = _build_grid(cfg)
        x0 = _vector(_get(cfg, "scenario.gbm.x0"), "scenario.gbm.x0")
        d = x0.shape[0]
        mu = _vector(_get(cfg, "scenario.gbm.mu", 0.0), "scenario.gbm.mu")
        sigma = _vector(_get(cfg, "scenario.gbm.sigma"), "scenario.gbm.sigma")
        if mu.shape == (1,) and d > 1:
            mu = np.full(d, mu[0])
        if sigma.shape == (1,) and d > 1:
            sigma = np.full(d, sigma[0])
        corr = np.asarray(_get(cfg, "scenario.gbm.corr", np.eye(d).tolist()), dtype=np.float64)
        try:
            params = GbmParams(mu=mu, sigma=sigma, corr=corr, x0=x0)
        except ValueError as exc:
            raise ConfigError("scenario.gbm", str(exc)) from None
        return simulate_gbm(params, grid, n_paths=n_paths, seed=seed)

    if kind == "garch_pca":
        grid = _build_grid(cfg)
        files = _get(cfg, "scenario.ingest.files", None)
        if files is not None:
            data = ingest_prices(files)
            rets = log_returns(data.prices)
            fits = [calibrate_garch(rets[:, k]) for k in range(rets.shape[1])]
            innov = np.column_stack(
                [garch_innovations(rets[:, k], fits[k].params) for k in range(rets.shape[1])]
            )
            pca = fit_pca(innov)
            garch = [f.params for f in fits]
            default_x0 = data.prices[-1, :].tolist()
        else:
            specs = _get(cfg, "scenario.garch")
            try:
                garch = [GarchParams(**{k: float(v) for k, v in s.items()}) for s in specs]
            except (TypeError, ValueError) as exc:
                raise ConfigError("scenario.garch", str(exc)) from None
            psec = _get(cfg, "scenario.pca")
            try:
                pca = PcaModel(
                    mean=np.asarray(psec["mean"], dtype=np.float64),
                    components=np.asarray(psec["components"], dtype=np.float64),
                    variances=np.asarray(psec["variances"], dtype=np.float64),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("scenario.pca", str(exc)) from None
            default_x0 = None
        x0 = _get(cfg, "scenario.initial_prices", default_x0)
        if x0 is None:
            raise ConfigError("scenario.initial_prices", "missing required key")
        return simulate_garch_pca(garch, pca, grid, n_paths=n_paths,
                                  initial_prices=_vector(x0, "scenario.initial_prices"),
                                  seed=seed)

    if kind == "csv":
        path = _get(cfg, "scenario.csv.path")
        dt = float(_get(cfg, "scenario.grid.dt"))
        r = float(_get(cfg, "scenario.grid.r", 0.0))
        return read_pathset_csv(path, dt=dt, r=r)

    raise ConfigError("scenario.kind", f"unknown scenario kind {kind!r}")


def _build_basis(cfg: dict, n_assets: int) -> BasisSpec:
    family = _get(cfg, "basis.family", "monomial")
    if family not in FAMILIES:
        raise ConfigError("basis.family", f"unknown family {family!r}, expected one of {FAMILIES}")
    degree = _get(cfg, "basis.degree", 2)
    tensor = bool(_get(cfg, "basis.tensor", True))
    scaling = _get(cfg, "basis.scaling", "auto")
    try:
        return BasisSpec(
            degree=int(degree),
            n_assets=n_assets,
            family=family,
            tensor=tensor,
            scaling=None if scaling == "auto" else _vector(scaling, "basis.scaling"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("basis", str(exc)) from None


def _build_oracle(cfg: dict) -> OracleSpec:
    kind = _get(cfg, "oracle.kind", "clipped_spread")
    try:
        if kind == "external_csv":
            return OracleSpec(kind=kind, path=str(_get(cfg, "oracle.path")))
        return OracleSpec(
            kind=kind,
            a=float(_get(cfg, "oracle.a", 0.0)),
            b_coef=float(_get(cfg, "oracle.b_coef", 0.0)),
            i_run=float(_get(cfg, "oracle.i_run", 0.0)),
            noise_std=float(_get(cfg, "oracle.noise_std", 0.0)),
            noise_seed=int(_get(cfg, "oracle.noise_seed", 0)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("oracle", str(exc)) from None


def _make_payoff(name: str, strike: float):
    if name == "call":
        return lambda x: np.maximum(x[:, 0] - strike, 0.0)
    if name == "put":
        return lambda x: np.maximum(strike - x[:, 0], 0.0)
    if name == "exchange":
        return lambda x: np.maximum(x[:, 0] - x[:, 1], 0.0)
    raise ConfigError("claim.payoff", f"unknown payoff {name!r} (call, put, exchange)")


def _quantile_levels(cfg: dict) -> tuple[float, ...]:
    probs = _get(cfg, "output.quantiles", [0.05, 0.95])
    levels = tuple(float(p) for p in probs)
    if any(not 0.0 <= p <= 1.0 for p in levels):
        raise ConfigError("output.quantiles", f"levels must lie in [0, 1], got {levels}")
    return levels


def _qlabel(p: float) -> str:
    s = f"{p * 100:.6g}".replace(".", "_")
    if len(s) == 1:
        s = "0" + s
    return "q" + s


# ---------------------------------------------------------------- writers


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _FLOAT_FMT % float(v)


def _write_csv(path: Path, header: list[str], rows, preamble: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if preamble:
            fh.write(preamble + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _resolved_preamble(command: str, cfg: dict) -> str:
    echo = {"command": command, **cfg}
    return "# resolved_config " + json.dumps(echo, sort_keys=True, separators=(",", ":"))


def _write_stages(path: Path, result) -> None:
    b, d = result.basis.n_elements, result.basis.n_assets
    header = ["t", "local_risk", "n_paths_used"]
    header += [f"gamma_{a + 1}" for a in range(b)]
    header += [f"psi_{a + 1}_{k + 1}" for k in range(d) for a in range(b)]
    rows = []
    for st in result.stages:
        row = [st.t, st.local_risk, st.n_paths_used]
        row += list(st.gamma)
        for k in range(d):
            row += list(st.psi[:, k])
        rows.append(row)
    _write_csv(path, header, rows)


def _write_values(path: Path, values: np.ndarray) -> None:
    _write_csv(path, ["path", "value"], [(i, v) for i, v in enumerate(values)])


# ---------------------------------------------------------------- commands


def _price_terminal_command(command: str, cfg: dict, out_dir: Path) -> int:
    seed = int(_get(cfg, "engine.seed", 20240))
    n_paths = int(_get(cfg, "engine.n_paths", 5000))
    paths = _build_paths(cfg, n_paths, seed)
    basis = _build_basis(cfg, paths.n_assets)
    strike = float(_get(cfg, "claim.strike", 0.0))
    payoff_name = _get(cfg, "claim.payoff", "exchange" if command == "price-exchange" else "call")
    if command == "price-exchange" and paths.n_assets < 2:
        raise ConfigError("scenario", "price-exchange needs at least two assets")
    claim = ClaimSpec(kind="european_payoff", payoff=_make_payoff(payoff_name, strike),
                      strike=strike)
    result = price_european(paths, claim, basis)
    probs = _quantile_levels(cfg)
    fan = quantile_fan(result.values, probs)
    hmc_price = float(result.value_t0.mean())
    analytic = _analytic_quote(cfg, paths, payoff_name, strike)

    steps = paths.grid.step_indices()
    header = ["t", "mean_value"] + [f"{_qlabel(p)}_value" for p in probs]
    header += ["hmc_price", "analytic_price"]
    rows = []
    for j, t in enumerate(steps):
        row = [int(t), fan.mean[j]] + [fan.quantiles[q, j] for q in range(len(probs))]
        row += [hmc_price, analytic]
        rows.append(row)
    _write_csv(out_dir / "report.csv", header, rows, _resolved_preamble(command, cfg))
    _write_values(out_dir / "values_t0.csv", result.value_t0)
    _write_stages(out_dir / "stages.csv", result)
    if bool(_get(cfg, "output.charts", True)):
        charts.emit_fan_chart(fan, out_dir / "fan.svg", steps=steps,
                              y_label="option value (currency)")
    return 0


def _analytic_quote(cfg: dict, paths: PathSet, payoff_name: str, strike: float):
    """Closed-form comparison price when the scenario admits one."""
    if _get(cfg, "scenario.kind", "gbm") != "gbm":
        return None
    grid = paths.grid
    t_years = grid.n_steps * grid.dt
    sigma = _vector(_get(cfg, "scenario.gbm.sigma"), "scenario.gbm.sigma")
    x0 = _vector(_get(cfg, "scenario.gbm.x0"), "scenario.gbm.x0")
    if payoff_name == "call" and paths.n_assets == 1:
        return black_scholes_call(float(x0[0]), strike, grid.r, float(sigma[0]), t_years).price
    if payoff_name == "exchange" and paths.n_assets == 2:
        corr = np.asarray(_get(cfg, "scenario.gbm.corr", np.eye(2).tolist()), dtype=np.float64)
        if sigma.shape == (1,):
            sigma = np.full(2, sigma[0])
        return margrabe(float(x0[0]), float(x0[1]), float(sigma[0]), float(sigma[1]),
                        correlation=float(corr[0, 1]), T=t_years).price
    return None


def _real_option_command(cfg: dict, out_dir: Path) -> int:
    seed = int(_get(cfg, "engine.seed", 20240))
    n_paths = int(_get(cfg, "engine.n_paths", 5000))
    paths = _build_paths(cfg, n_paths, seed)
    basis = _build_basis(cfg, paths.n_assets)
    oracle_spec = _build_oracle(cfg)
    flows = generate_cashflows(oracle_spec, paths)
    strike = float(_get(cfg, "claim.strike"))
    window = _get(cfg, "claim.exercise_window")
    try:
        claim = ClaimSpec(kind="real_option", strike=strike,
                          exercise_window=(int(window[0]), int(window[1])))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError("claim.exercise_window", str(exc)) from None
    result = price_real_option(paths, flows, claim, basis)

    probs = _quantile_levels(cfg)
    t_first, t_last = result.window
    offsets = [t - paths.grid.t0 for t in range(t_first, t_last + 1)]
    iv = result.project_values[:, offsets] - strike
    fan = quantile_fan(iv, probs)
    header = ["t", "mean_IV"] + [f"{_qlabel(p)}_IV" for p in probs] + ["nu_t", "pr_t", "mean_option"]
    rows = []
    for j, t in enumerate(range(t_first, t_last + 1)):
        row = [t, fan.mean[j]] + [fan.quantiles[q, j] for q in range(len(probs))]
        row += [result.triggers[t], result.exercise_probs[t], float(result.values[:, j].mean())]
        rows.append(row)
    _write_csv(out_dir / "report.csv", header, rows,
               _resolved_preamble("price-real-option", cfg))
    _write_values(out_dir / "values_t0.csv", result.value_t0)
    _write_stages(out_dir / "stages.csv", result)
    if bool(_get(cfg, "output.charts", True)):
        steps = np.arange(t_first, t_last + 1)
        charts.emit_fan_chart(fan, out_dir / "fan.svg", steps=steps,
                              y_label="intrinsic value (currency)")
        t_scatter = int(_get(cfg, "output.scatter_t", t_first))
        if not t_first <= t_scatter <= t_last:
            raise ConfigError("output.scatter_t", f"step {t_scatter} outside window")
        x = paths.prices_at(t_scatter)[:, 0]
        j = t_scatter - t_first
        charts.emit_scatter_chart(
            x,
            [("option value", result.values[:, j], "circle"),
             ("intrinsic value", iv[:, j], "cross")],
            out_dir / "scatter.svg",
            x_label="asset 1 price",
        )
    return 0


def _simulate_command(cfg: dict, out_dir: Path) -> int:
    seed = int(_get(cfg, "engine.seed", 20240))
    n_paths = int(_get(cfg, "engine.n_paths", 5000))
    paths = _build_paths(cfg, n_paths, seed)
    write_pathset_csv(paths, out_dir / "paths.csv")
    probs = _quantile_levels(cfg)
    steps = paths.grid.step_indices()
    header = ["t"]
    fans = []
    for k in range(paths.n_assets):
        fan = quantile_fan(paths.prices[:, :, k], probs)
        fans.append(fan)
        header += [f"mean_asset{k + 1}"] + [f"{_qlabel(p)}_asset{k + 1}" for p in probs]
    rows = []
    for j, t in enumerate(steps):
        row = [int(t)]
        for fan in fans:
            row += [fan.mean[j]] + [fan.quantiles[q, j] for q in range(len(probs))]
        rows.append(row)
    _write_csv(out_dir / "report.csv", header, rows, _resolved_preamble("simulate", cfg))
    if bool(_get(cfg, "output.charts", True)):
        charts.emit_fan_chart(fans[0], out_dir / "fan.svg", steps=steps,
                              y_label="asset 1 price (currency)")
    return 0


def _calibrate_command(cfg: dict, out_dir: Path) -> int:
    files = _get(cfg, "scenario.ingest.files")
    if not isinstance(files, list) or not files:
        raise ConfigError("scenario.ingest.files", "expected a nonempty list of CSV paths")
    data = ingest_prices(files)
    rets = log_returns(data.prices)
    fits = [calibrate_garch(rets[:, k]) for k in range(rets.shape[1])]
    header = ["asset", "file", "n_obs", "mu", "omega", "alpha", "beta", "sigma0_sq",
              "log_likelihood", "dropped_dates"]
    rows = []
    for k, fit in enumerate(fits):
        p = fit.params
        rows.append([k + 1, data.names[k], fit.n_obs, p.mu, p.omega, p.alpha, p.beta,
                     p.sigma0_sq, fit.log_likelihood, data.n_dropped])
    _write_csv(out_dir / "report.csv", header, rows,
               _resolved_preamble("calibrate-garch", cfg))

    innov = np.column_stack(
        [garch_innovations(rets[:, k], fits[k].params) for k in range(rets.shape[1])]
    )
    pca = fit_pca(innov)
    d = pca.mean.shape[0]
    pca_rows = [["mean", 0] + list(pca.mean), ["variance", 0] + list(pca.variances)]
    for j in range(d):
        pca_rows.append([f"component", j + 1] + list(pca.components[j]))
    _write_csv(out_dir / "pca.csv", ["kind", "index"] + [f"v{k + 1}" for k in range(d)], pca_rows)
    return 0


def _validate_command(cfg: dict, out_dir: Path) -> int:
    """Closed-form comparison suites: Black-Scholes sweep and Margrabe."""
    seed = int(_get(cfg, "engine.seed", 20240))
    spots = [float(s) for s in _get(cfg, "validate.spots", [80, 90, 100, 110, 120])]
    strike = float(_get(cfg, "validate.strike", 100.0))
    sigma = float(_get(cfg, "validate.sigma", 0.3))
    r = float(_get(cfg, "validate.r", 0.05))
    t_years = float(_get(cfg, "validate.t_years", 0.25))
    n_steps = int(_get(cfg, "validate.n_steps", 65))
    n_paths = int(_get(cfg, "validate.n_paths", 5000))
    price_tol_floor = float(_get(cfg, "validate.price_tol", 0.25))
    delta_tol = float(_get(cfg, "validate.delta_tol", 0.05))

    grid = TimeGrid(n_steps=n_steps, dt=t_years / n_steps, r=r)
    basis = BasisSpec(degree=2, n_assets=1)
    rows = []
    all_pass = True
    for spot in spots:
        params = GbmParams(mu=np.array([0.0]), sigma=np.array([sigma]),
                           corr=np.eye(1), x0=np.array([spot]))
        paths = simulate_gbm(params, grid, n_paths=n_paths, seed=seed)
        claim = ClaimSpec(kind="european_payoff",
                          payoff=_make_payoff("call", strike), strike=strike)
        result = price_european(paths, claim, basis)
        hmc = float(result.value_t0.mean())
        quote = black_scholes_call(spot, strike, r, sigma, t_years)
        disc_payoff = discount_factor(grid) ** -n_steps * claim.payoff(paths.prices_at(grid.t_final))
        se = float(disc_payoff.std(ddof=1) / np.sqrt(n_paths))
        tol = max(price_tol_floor, 3.0 * se)
        ok = abs(hmc - quote.price) <= tol
        all_pass &= ok
        rows.append(["black_scholes_price", spot, hmc, quote.price,
                     abs(hmc - quote.price), tol, ok])
        if spot in (spots[0], spots[len(spots) // 2], spots[-1]):
            h0 = result.stages[0]
            hedge = float(
                np.einsum("ak,ak->", eval_hedge_basis(result.basis, paths.prices_at(0)[0]), h0.psi)
            )
            ok = abs(hedge - quote.deltas[0]) <= delta_tol
            all_pass &= ok
            rows.append(["black_scholes_delta", spot, hedge, quote.deltas[0],
                         abs(hedge - quote.deltas[0]), delta_tol, ok])

    # exchange option: independent drivers, artifact day count on both sides
    n_steps_x = int(_get(cfg, "validate.exchange_steps", 65))
    grid_x = TimeGrid(n_steps=n_steps_x, dt=1.0 / 252.0, r=r)
    params = GbmParams(mu=np.zeros(2), sigma=np.array([0.3, 0.2]), corr=np.eye(2),
                       x0=np.array([100.0, 100.0]))
    paths = simulate_gbm(params, grid_x, n_paths=int(_get(cfg, "validate.exchange_paths", 10000)),
                         seed=seed)
    claim = ClaimSpec(kind="european_payoff", payoff=_make_payoff("exchange", 0.0))
    result = price_european(paths, claim, BasisSpec(degree=2, n_assets=2))
    hmc = float(result.value_t0.mean())
    quote = margrabe(100.0, 100.0, 0.3, 0.2, correlation=0.0, T=n_steps_x * grid_x.dt)
    disc_payoff = discount_factor(grid_x) ** -n_steps_x * claim.payoff(paths.prices_at(grid_x.t_final))
    se = float(disc_payoff.std(ddof=1) / np.sqrt(paths.n_paths))
    tol = max(price_tol_floor, 3.0 * se)
    ok = abs(hmc - quote.price) <= tol
    all_pass &= ok
    rows.append(["margrabe_price", 100.0, hmc, quote.price, abs(hmc - quote.price), tol, ok])

    _write_csv(out_dir / "report.csv",
               ["check", "spot", "hmc", "analytic", "abs_error", "tolerance", "passed"],
               rows, _resolved_preamble("validate", cfg))
    return 0 if all_pass else 1


# ---------------------------------------------------------------- entry


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmc",
        description="Hedged Monte Carlo pricing of real and financial options.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (dotted path, JSON value)")
    parser.add_argument("--out", default=None, help="output directory (default: output.dir or 'out')")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        _apply_overrides(cfg, args.set)
        out_dir = Path(args.out or _get(cfg, "output.dir", "out"))
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command in ("price-european", "price-exchange"):
            status = _price_terminal_command(args.command, cfg, out_dir)
        elif args.command == "price-real-option":
            status = _real_option_command(cfg, out_dir)
        elif args.command == "simulate":
            status = _simulate_command(cfg, out_dir)
        elif args.command == "calibrate-garch":
            status = _calibrate_command(cfg, out_dir)
        else:
            status = _validate_command(cfg, out_dir)
    except OSError as exc:
        print(f"hmc: I/O error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"hmc: {exc}", file=sys.stderr)
        return 1
    except (ValueError, CalibrationError) as exc:
        print(f"hmc: {exc}", file=sys.stderr)
        return 1
    return status
