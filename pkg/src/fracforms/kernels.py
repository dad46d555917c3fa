"""Hot summation kernel for the Grunwald-Letnikov quadrature.

Two interchangeable implementations of the weighted sum
``sum_k (-1)^k binom(q, k) f_k``:

* a numba ``@njit`` loop with Kahan-compensated accumulation (default when
  numba imports), and
* a vectorized numpy path that pairs ``cumprod`` weights with ``math.fsum``.

Set ``FRACFORMS_PURE_NUMPY=1`` to force the numpy path.  Both paths use
compensated accumulation in a fixed order, so results do not depend on how
the sum might be partitioned.  ``benchmarks/gl_kernel_bench.py`` compares the
two directly.
"""

from __future__ import annotations

import math
import os

import numpy as np

FORCE_NUMPY = os.environ.get("FRACFORMS_PURE_NUMPY", "") == "1"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap


def gl_weights(q: float, count: int) -> np.ndarray:
    """First ``count`` weights (-1)^k binom(q, k) via the stable recurrence."""
    w = np.empty(count, dtype=np.float64)
    w[0] = 1.0
    if count > 1:
        k = np.arange(1, count, dtype=np.float64)
        np.cumprod((k - 1.0 - q) / k, out=w[1:])
    return w


def gl_sum_numpy(fvals: np.ndarray, q: float) -> float:
    fvals = np.asarray(fvals, dtype=np.float64)
    return math.fsum(gl_weights(q, fvals.shape[0]) * fvals)


@njit(cache=True)
def _gl_sum_numba_impl(fvals, q):  # pragma: no cover - measured via dispatch
    acc = fvals[0]
    comp = 0.0
    w = 1.0
    for k in range(1, fvals.shape[0]):
        w *= (k - 1.0 - q) / k
        y = w * fvals[k] - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


def gl_sum_numba(fvals: np.ndarray, q: float) -> float:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not available in this environment")
    fvals = np.ascontiguousarray(fvals, dtype=np.float64)
    return float(_gl_sum_numba_impl(fvals, float(q)))


if HAVE_NUMBA and not FORCE_NUMPY:
    _ACTIVE = gl_sum_numba
    _BACKEND = "numba"
else:
    _ACTIVE = gl_sum_numpy
    _BACKEND = "numpy"


def gl_weighted_sum(fvals: np.ndarray, q: float) -> float:
    """Weighted sum over the active backend (see :func:`backend`)."""
    return float(_ACTIVE(fvals, q))


def backend() -> str:
    """Name of the backend the dispatcher selected at import time."""
    return _BACKEND
