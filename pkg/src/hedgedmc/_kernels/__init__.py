"""Hot recursion kernels with a compiled core and a pure-numpy fallback.

The GARCH(1,1) variance recursion is the one genuinely serial loop in the
package: the quasi-likelihood gets evaluated thousands of times inside the
simplex search. A small Cython extension covers it; when the extension is
not built (or HMC_KERNELS=fallback is set) the numpy/scipy implementations
in `_fallback` are used instead. Both backends are numerically identical.
"""

import os

_forced = os.environ.get("HMC_KERNELS", "").strip().lower()

if _forced == "fallback":
    from . import _fallback as _impl

    BACKEND = "fallback"
elif _forced == "native":
    from . import _native as _impl  # ImportError here is deliberate: user forced native

    BACKEND = "native"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "fallback"

garch_filter = _impl.garch_filter
garch_neg_loglik = _impl.garch_neg_loglik
garch_simulate = _impl.garch_simulate

__all__ = ["BACKEND", "garch_filter", "garch_neg_loglik", "garch_simulate"]
