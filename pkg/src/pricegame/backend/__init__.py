"""Array kernels for the hot enumeration loops.

Two interchangeable implementations exist:

* :mod:`pricegame.backend.numba_backend` -- ``@njit``-compiled loops (default);
* :mod:`pricegame.backend.numpy_backend` -- vectorized pure-numpy fallback.

Selection: set ``PRICEGAME_BACKEND=numpy`` (or ``numba``) in the environment,
or pass ``name`` explicitly.  When numba is unavailable the numpy path is used
silently.  Both backends take the same scaled-int64 arrays (see
:mod:`pricegame.backend.encode`) and must produce identical results; the test
suite cross-checks them against the pure-Fraction reference.
"""

from __future__ import annotations

import os

from . import numpy_backend

_ENV_VAR = "PRICEGAME_BACKEND"
_cached = None


def get_backend(name: str | None = None):
    """Return the kernel module, honoring ``PRICEGAME_BACKEND``."""
    global _cached
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or "auto"
    if name == "numpy":
        return numpy_backend
    if name in ("numba", "auto"):
        if _cached is not None:
            return _cached
        try:
            from . import numba_backend
            _cached = numba_backend
            return numba_backend
        except ImportError:
            if name == "numba":
                raise
            _cached = numpy_backend
            return numpy_backend
    raise ValueError(f"unknown backend {name!r} (use 'numba' or 'numpy')")
