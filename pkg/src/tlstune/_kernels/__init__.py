"""Numeric hot kernels with a compiled core and a pure-numpy fallback.

The compiled extension (Cython) is used when importable; set the environment
variable ``TLSTUNE_PURE_KERNELS=1`` to force the fallback. Both backends
implement the same algorithms, so results should agree to float summation
order; ``available_backends`` exposes whichever can be imported, for tests
and benchmarks.
"""

import os

from . import _pure

BACKEND = "pure"
_impl = _pure
if os.environ.get("TLSTUNE_PURE_KERNELS", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _compiled as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        pass

lorentzian_rate = _impl.lorentzian_rate
fit_exp_decay = _impl.fit_exp_decay
TAU_MIN = _pure.TAU_MIN


def available_backends():
    """Importable kernel backends, name -> module."""
    backends = {"pure": _pure}
    try:
        from . import _compiled
        backends["compiled"] = _compiled
    except ImportError:
        pass
    return backends
