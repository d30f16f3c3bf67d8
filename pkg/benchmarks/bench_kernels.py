"""Benchmark the compiled GARCH kernels against the numpy/scipy fallback.

Run:  python benchmarks/bench_kernels.py

Times the two operations that sit inside hot loops: the likelihood filter
(called thousands of times per calibration) and path simulation. Also
times one full calibration per backend for an end-to-end read.
"""

import time

import numpy as np

from hedgedmc._kernels import _fallback

try:
    from hedgedmc._kernels import _native
except ImportError:
    _native = None

ARGS = (0.0001, 1e-6, 0.08, 0.90, 1e-4)


def bench(fn, *args, repeat: int = 7, number: int = 20) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / number)
    return best


def fmt(seconds: float) -> str:
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


def main() -> None:
    rng = np.random.Generator(np.random.Philox(key=1))
    returns = rng.normal(0, 0.01, 5000)
    shocks_small = rng.standard_normal((10_000, 36))
    shocks_big = rng.standard_normal((20_000, 252))

    cases = [
        ("garch_neg_loglik, T=5000", "garch_neg_loglik", (returns,) + ARGS, 50),
        ("garch_filter,     T=5000", "garch_filter", (returns,) + ARGS, 50),
        ("garch_simulate, 10k x 36", "garch_simulate", (shocks_small,) + ARGS, 10),
        ("garch_simulate, 20k x 252", "garch_simulate", (shocks_big,) + ARGS, 3),
    ]

    print(f"{'kernel':28} {'fallback':>12} {'native':>12} {'speedup':>9}")
    for label, name, args, number in cases:
        t_fb = bench(getattr(_fallback, name), *args, number=number)
        if _native is None:
            print(f"{label:28} {fmt(t_fb):>12} {'n/a':>12} {'n/a':>9}")
            continue
        t_nat = bench(getattr(_native, name), *args, number=number)
        print(f"{label:28} {fmt(t_fb):>12} {fmt(t_nat):>12} {t_fb / t_nat:8.1f}x")

    # end to end: one full calibration per backend
    import hedgedmc.scenarios as scenarios

    for impl, label in ((_fallback, "fallback"), (_native, "native")):
        if impl is None:
            continue
        saved = (scenarios.garch_neg_loglik, scenarios.garch_filter)
        scenarios.garch_neg_loglik = impl.garch_neg_loglik
        scenarios.garch_filter = impl.garch_filter
        try:
            start = time.perf_counter()
            fit = scenarios.calibrate_garch(returns)
            took = time.perf_counter() - start
        finally:
            scenarios.garch_neg_loglik, scenarios.garch_filter = saved
        print(f"calibrate_garch ({label}): {fmt(took)}  "
              f"(alpha={fit.params.alpha:.3f}, beta={fit.params.beta:.3f})")


if __name__ == "__main__":
    main()
