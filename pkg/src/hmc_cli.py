"""Launcher for the `hmc` command.

Thread-pool environment variables must be set before numpy loads its BLAS,
so this tiny module (no heavy imports) runs first: it pins the linear
algebra pools to one thread for bit-reproducible output and records the
HMC_THREADS worker cap, then hands over to the real CLI.
"""

import os
import sys


def _cap_threads() -> None:
    raw = os.environ.get("HMC_THREADS", "").strip()
    try:
        cap = int(raw) if raw else 0
    except ValueError:
        cap = 0
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
        "VECLIB_MAXIMUM_THREADS",
    ):
        os.environ.setdefault(var, "1")
    if cap > 0:
        os.environ["HMC_MAX_WORKERS"] = str(cap)


def main(argv=None) -> int:
    _cap_threads()
    from hedgedmc.cli import main as run

    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
