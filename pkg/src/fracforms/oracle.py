"""Numeric differintegration of black-box scalar functions.

This is the independent check on every symbolic result, and the evaluation
path for charts whose maps fall outside the power-product class.  The scheme
is the backward Grunwald-Letnikov sum

    D^q f(x)  ~  h^(-q) * sum_{k=0..N} (-1)^k binom(q, k) f(x - k h),

first-order accurate in h, optionally sharpened by Richardson extrapolation
assuming the leading error is O(h).  Functions with an integrable endpoint
singularity (for example t^(-1/2) integrated from 0) are sampled starting at
a + h: the endpoint node is dropped when the function is not finite there.
"""

from __future__ import annotations

import warnings
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NonConvergenceWarning, QuadratureDomainError
from .kernels import gl_weighted_sum
from .symbolic import Context, Expr

MIN_STEPS = 10


def _sample(f: Callable[[np.ndarray], np.ndarray], nodes: np.ndarray) -> np.ndarray:
    """Evaluate f on the node array, vectorized when the callable allows it."""
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(nodes), dtype=np.float64)
        if vals.shape != nodes.shape:
            raise ValueError
        return vals
    except QuadratureDomainError:
        raise
    except Exception:
        out = np.empty(nodes.shape[0], dtype=np.float64)
        for i, t in enumerate(nodes):
            try:
                out[i] = float(f(float(t)))
            except Exception:
                out[i] = np.nan
        return out


def _gl_with_steps(f, q: float, x: float, a: float, steps: int) -> float:
    h = (x - a) / steps
    nodes = x - h * np.arange(steps + 1, dtype=np.float64)
    vals = _sample(f, nodes)
    bad = ~np.isfinite(vals)
    if bad.any():
        # only the initial-point node may be singular; start at a + h then
        if bad[:-1].any():
            where = nodes[np.nonzero(bad[:-1])[0][0]]
            raise QuadratureDomainError(f"integrand undefined at sample node t={where}")
        vals = vals[:-1]
    return gl_weighted_sum(vals, q) * h ** (-q)


def gl_deriv(f: Callable, q: float, x: float, a: float = 0.0, h: float = 1e-4) -> float:
    """Grunwald-Letnikov differintegral of order q at x, anchored at a.

    ``h`` is nudged to the nearest value that divides x - a into a whole
    number of steps (at least :data:`MIN_STEPS`).
    """
    if not x > a:
        raise ValueError(f"evaluation point must sit above the initial point ({x} <= {a})")
    if h <= 0:
        raise ValueError("step must be positive")
    steps = int(round((x - a) / h))
    if steps < MIN_STEPS:
        raise ValueError(
            f"step {h} leaves only {steps} nodes on [{a}, {x}]; need at least {MIN_STEPS}"
        )
    return _gl_with_steps(f, float(q), float(x), float(a), steps)


class RichardsonResult(NamedTuple):
    """Extrapolated value with a first-omitted-column error estimate."""

    value: float
    error_estimate: float
    converged: bool


def richardson(f: Callable, q: float, x: float, a: float = 0.0, h0: float = 1e-4,
               levels: int = 3) -> RichardsonResult:
    """Richardson-extrapolated GL value assuming an O(h) leading error.

    Runs the plain sum at h0, h0/2, ..., h0/2^(levels-1) and eliminates error
    orders 1, 2, ... down the triangular table.  Warns (and reports
    ``converged=False``) when the last two diagonal entries disagree by more
    than 10x the error estimate.
    """
    if not 2 <= levels <= 5:
        raise ValueError(f"levels must be between 2 and 5, got {levels}")
    if not x > a:
        raise ValueError(f"evaluation point must sit above the initial point ({x} <= {a})")
    steps0 = max(MIN_STEPS, int(round((x - a) / h0)))
    rows: list[list[float]] = []
    for lvl in range(levels):
        row = [_gl_with_steps(f, float(q), float(x), float(a), steps0 * 2 ** lvl)]
        for j in range(1, lvl + 1):
            factor = 2.0 ** j
            row.append((factor * row[j - 1] - rows[lvl - 1][j - 1]) / (factor - 1.0))
        rows.append(row)
    value = rows[-1][-1]
    estimate = abs(rows[-1][-1] - rows[-1][-2])
    diag_step = abs(rows[-1][-1] - rows[-2][-1])
    converged = diag_step <= 10.0 * estimate + 1e-13 * (1.0 + abs(value))
    if not converged:
        warnings.warn(
            f"extrapolants moved by {diag_step:.3e}, over 10x the estimate {estimate:.3e}",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return RichardsonResult(value, estimate, converged)


def _freeze(f: Callable, coord: int, point: Sequence[float]) -> Callable:
    fixed = [np.float64(v) for v in point]

    def g(t):
        args = list(fixed)
        args[coord] = t
        return f(args)

    return g


def gl_partial(f: Callable, coord: int, q: float, point: Sequence[float],
               a: float = 0.0, h: float = 1e-4) -> float:
    """GL partial of a multivariate evaluable along one coordinate line."""
    return gl_deriv(_freeze(f, coord, point), q, float(point[coord]), a, h)


def richardson_partial(f: Callable, coord: int, q: float, point: Sequence[float],
                       a: float = 0.0, h0: float = 1e-4, levels: int = 3) -> RichardsonResult:
    """Richardson-extrapolated GL partial along one coordinate line."""
    return richardson(_freeze(f, coord, point), q, float(point[coord]), a, h0, levels)


def expr_evaluable(e: Expr, ctx: Context) -> Callable:
    """Vectorized numpy evaluation of an expression.

    Unlike :func:`fracforms.symbolic.eval_expr`, domain violations surface as
    non-finite samples for the quadrature layer to police, which is what the
    endpoint-singularity policy needs.
    """
    a = np.asarray(ctx.initial_points, dtype=np.float64)

    def f(pt):
        total = 0.0
        for t in e.terms:
            v = np.float64(t.coeff)
            for i, p in enumerate(t.exponents):
                if p == 0.0:
                    continue
                with np.errstate(all="ignore"):
                    v = v * np.power(np.asarray(pt[i], dtype=np.float64) - a[i], p)
            total = total + v
        return total

    return f


def expr_univariate(e: Expr, ctx: Context, coord: int | str, point: Sequence[float]) -> Callable:
    """Freeze every coordinate but one, returning a vectorized t -> f(t)."""
    coord = ctx.index(coord)
    multi = expr_evaluable(e, ctx)

    def g(t):
        args: list = [np.float64(v) for v in point]
        args[coord] = t
        return multi(args)

    return g
