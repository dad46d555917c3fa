"""Fractional derivative and integral of power-product expressions.

The differintegral of real order q acts term by term through the power rule

    (x - a)^p  ->  gamma(p+1)/gamma(p-q+1) * (x - a)^(p-q),      p > -1,

with negative q meaning integration from the initial point.  A term is
annihilated exactly when p - q + 1 lands on a non-positive integer (the
reciprocal-gamma zero); that is how whole orders reproduce the classical
derivative, kernel basis elements map to zero, and so on.

Whole orders take a falling/rising-factorial fast path so that order-1 and
order-2 results are bit-identical to :func:`fracforms.symbolic.classical_derivative`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ExponentDomainError
from .specialfn import POLE_TOL, gamma_ratio, gen_binomial, rgamma, snap_int, whole_ceil
from .symbolic import (
    EXP_TOL,
    Context,
    Expr,
    PowerTerm,
    canonicalize,
    classical_derivative,
    degree_in,
    eval_expr,
    is_polynomial_in,
    is_zero,
    restrict_at_initial,
    shift_exponent,
)


@dataclass(frozen=True)
class FracOrder:
    """A real order q together with its ceiling whole order m."""

    q: float

    @property
    def m(self) -> int:
        return whole_ceil(self.q)

    @property
    def is_whole(self) -> bool:
        return snap_int(self.q) is not None


def _whole_order_factor(p: float, k: int) -> float:
    """gamma(p+1)/gamma(p-k+1) for whole k, as an exact factor product."""
    if k >= 0:
        acc = 1.0
        for i in range(k):
            f = p - i
            if abs(f) <= EXP_TOL:
                return 0.0
            acc *= f
        return acc
    acc = 1.0
    for i in range(1, -k + 1):
        acc *= p + i
    return 1.0 / acc


def power_rule_map(e: Expr, coord: int, q: float, ctx: Context,
                   extra_denominators: tuple[float, ...] = ()) -> Expr:
    """Apply the fractional power rule along ``coord``; shared inner loop.

    ``extra_denominators`` multiplies every coefficient by
    1/prod gamma(d); the coordinate-transform module uses it so that ratios
    like gamma(nu+1)/gamma(nu+1) cancel exactly.
    """
    coord = ctx.index(coord)
    for t in e.terms:
        if t.exponents[coord] <= -1.0 + POLE_TOL:
            raise ExponentDomainError(
                f"exponent {t.exponents[coord]} on {ctx.names[coord]} is outside "
                f"the operator domain (needs p > -1)"
            )
    k = snap_int(q)
    out = []
    for t in e.terms:
        p = t.exponents[coord]
        if k is not None and not extra_denominators:
            factor = _whole_order_factor(p, k)
        else:
            factor = gamma_ratio((p + 1.0,), (p - q + 1.0, *extra_denominators))
        if factor == 0.0:
            continue
        exps = list(t.exponents)
        exps[coord] = p - q
        out.append(PowerTerm(t.coeff * factor, tuple(exps)))
    return canonicalize(Expr(tuple(out), e.n))


def rl_deriv(e: Expr, coord: int | str, q: float, ctx: Context) -> Expr:
    """Differintegral of order q along one coordinate (negative q integrates)."""
    return power_rule_map(e, ctx.index(coord), float(q), ctx)


def rl_integ(e: Expr, coord: int | str, q: float, ctx: Context) -> Expr:
    """Fractional integral of order q > 0 from the initial point."""
    if q <= 0:
        raise ValueError(f"integral order must be positive, got {q}")
    return power_rule_map(e, ctx.index(coord), -float(q), ctx)


def compose_residual(e: Expr, coord: int | str, p: float, q: float, ctx: Context) -> Expr:
    """Defect of additivity for order-p after order-q differentiation.

    Returns  D^p D^q e  -  D^(p+q) e  +  sum_{j=1..k} [D^(q-j) e]_{x=a}
    * (x-a)^(-p-j) / gamma(1-p-j),  with k the ceiling whole order of q.
    The sum restores the boundary terms that naive additivity forgets, so the
    result is zero exactly when composition behaves.
    """
    coord = ctx.index(coord)
    if p < 0 or q < 0:
        raise ValueError("composition residual is defined for p >= 0 and q >= 0")
    k = max(1, whole_ceil(q))
    lhs = rl_deriv(rl_deriv(e, coord, q, ctx), coord, p, ctx)
    direct = rl_deriv(e, coord, p + q, ctx)
    result = lhs - direct
    for j in range(1, k + 1):
        boundary = restrict_at_initial(rl_deriv(e, coord, q - j, ctx), coord, ctx)
        if is_zero(boundary):
            continue
        correction = shift_exponent(boundary * rgamma(1.0 - p - j), coord, -p - j)
        result = result + correction
    return canonicalize(result)


class SeriesResult(NamedTuple):
    """Product-rule series value plus truncation metadata."""

    expr: Expr
    truncated: bool
    tail_estimate: float


def product_rule_series(f: Expr, g: Expr, coord: int | str, q: float, ctx: Context,
                        K: int | None = None) -> SeriesResult:
    """Leibniz-type series sum_j binom(q, j) * D^(q-j) f * g^(j).

    The series terminates by itself when ``g`` is a polynomial in ``coord``
    (the classical derivatives eventually vanish); otherwise a truncation
    bound ``K`` is required.  ``truncated`` is set when the cut dropped a
    next term whose magnitude at the probe point (a_i + 1) exceeds 1e-9.
    """
    coord = ctx.index(coord)
    if is_polynomial_in(g, coord):
        deg = int(round(degree_in(g, coord)))
        upto = deg if K is None else min(K, deg)
    else:
        if K is None:
            raise ValueError(
                f"g is not a polynomial in {ctx.names[coord]}; pass a truncation bound K"
            )
        upto = K
    total = Expr.zero(f.n)
    for j in range(upto + 1):
        gj = classical_derivative(g, coord, j)
        if is_zero(gj):
            continue
        # fold the binomial into the factorially-growing factor first, so the
        # canonical drop threshold never sees a tiny intermediate coefficient
        total = total + (gen_binomial(q, j) * gj) * rl_deriv(f, coord, q - j, ctx)
    g_next = classical_derivative(g, coord, upto + 1)
    tail = 0.0
    if not is_zero(g_next):
        next_term = (gen_binomial(q, upto + 1) * g_next) * rl_deriv(f, coord, q - upto - 1, ctx)
        probe = tuple(a + 1.0 for a in ctx.initial_points)
        try:
            tail = abs(eval_expr(next_term, ctx, probe))
        except Exception:
            tail = math.inf
    return SeriesResult(canonicalize(total), tail > 1e-9, tail)
