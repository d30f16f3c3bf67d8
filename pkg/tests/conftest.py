import datetime as dt

import numpy as np
import pytest

from hedgedmc._kernels import garch_simulate


def _trading_dates(start: dt.date, count: int) -> list[str]:
    out = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day.isoformat())
        day += dt.timedelta(days=1)
    return out


@pytest.fixture(scope="session")
def price_csvs(tmp_path_factory):
    """Two synthetic daily price histories in the `date,price` layout.

    Zero-mean GARCH-flavored returns keep the levels near their starting
    values so downstream cash flows straddle the clip region.
    """
    root = tmp_path_factory.mktemp("histdata")
    rng = np.random.Generator(np.random.Philox(key=42))
    n = 1500
    z = rng.standard_normal((2, n))
    r1 = garch_simulate(z[:1], 0.0, 2.0e-6, 0.08, 0.90, 1.0e-4)[0]
    r2 = garch_simulate(z[1:], 0.0, 1.5e-6, 0.06, 0.92, 7.0e-5)[0]
    p1 = 1200.0 * np.exp(np.cumsum(r1))
    p2 = 4.0 * np.exp(np.cumsum(r2))
    dates = _trading_dates(dt.date(2004, 8, 19), n)
    files = []
    for name, series in (("asset1.csv", p1), ("asset2.csv", p2)):
        path = root / name
        with open(path, "w") as fh:
            fh.write("date,price\n")
            for d, p in zip(dates, series):
                fh.write(f"{d},{p:.8f}\n")
        files.append(str(path))
    return tuple(files)
