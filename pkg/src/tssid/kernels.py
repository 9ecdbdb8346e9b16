"""Backend selection for the numeric kernels.

By default every kernel in :mod:`tssid._kernels_src` is compiled with
numba's nopython mode.  Setting the environment variable ``TSSID_NUMBA=0``
(also ``false``/``no``/``off``) keeps the plain numpy implementations, and
so does a missing numba installation.  The flag changes execution speed
only, never results: both backends run the same source and produce the
same float64 arithmetic.

``BACKEND`` reports which path is active ("numba" or "numpy").
"""

from __future__ import annotations

import os

from . import _kernels_src as _src

__all__ = [
    "BACKEND",
    "rk4_first_order",
    "rk4_cascade",
    "rk4_sparse",
    "mlp_forward",
    "mlp_value_and_grad",
    "lstm_forward",
    "lstm_value_and_grad",
]

_KERNEL_NAMES = __all__[1:]


def _want_numba() -> bool:
    flag = os.environ.get("TSSID_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


BACKEND = "numpy"

if _want_numba():
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
    if numba is not None:
        _jit = numba.njit(cache=True, fastmath=False)
        for _name in _KERNEL_NAMES:
            globals()[_name] = _jit(getattr(_src, _name))
        BACKEND = "numba"

if BACKEND == "numpy":
    for _name in _KERNEL_NAMES:
        globals()[_name] = getattr(_src, _name)
