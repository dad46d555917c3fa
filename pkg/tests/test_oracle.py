"""Grunwald-Letnikov quadrature and Richardson extrapolation.

Reference values come from the closed-form power rule evaluated by hand with
high-precision gamma factors, never from the symbolic module under test.
"""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracforms import (
    Context,
    NonConvergenceWarning,
    QuadratureDomainError,
    expr_univariate,
    gl_deriv,
    gl_partial,
    monomial,
    richardson,
    richardson_partial,
)
from fracforms.oracle import MIN_STEPS

SQRT_PI = 1.7724538509055160


# ---------------------------------------------------------------------------
# plain sums


def test_half_derivative_of_identity():
    # D^0.5 t at t=1 is 2/sqrt(pi)
    got = gl_deriv(lambda t: t, 0.5, 1.0, 0.0, h=1e-4)
    assert got == pytest.approx(2.0 / SQRT_PI, rel=1e-3)


def test_whole_derivative_of_constant_is_exact_zero():
    # order-1 weights cut off after two nodes, so the sum telescopes to zero
    assert gl_deriv(lambda t: np.ones_like(t), 1.0, 2.0, 0.0, h=1e-3) == 0.0


def test_whole_derivative_of_square():
    got = gl_deriv(lambda t: t * t, 1.0, 3.0, 0.0, h=1e-4)
    assert got == pytest.approx(6.0, rel=1e-4)


def test_order_zero_returns_the_sample():
    f = lambda t: np.cos(t)
    assert gl_deriv(f, 0.0, 1.3, 0.0, h=1e-3) == pytest.approx(math.cos(1.3), abs=1e-15)


def test_half_integral_of_identity():
    # D^-0.5 t at t=1 is gamma(2)/gamma(2.5)
    got = gl_deriv(lambda t: t, -0.5, 1.0, 0.0, h=1e-4)
    assert got == pytest.approx(0.7522527780636751, rel=1e-3)


def test_shifted_initial_point():
    got = gl_deriv(lambda t: t - 2.0, 0.5, 3.0, 2.0, h=1e-4)
    assert got == pytest.approx(2.0 / SQRT_PI, rel=1e-3)


@given(
    st.floats(min_value=0.1, max_value=1.9),
    st.floats(min_value=0.5, max_value=3.0),
)
@settings(max_examples=60, deadline=None)
def test_linearity_in_the_integrand(q, x):
    f = lambda t: t
    g = lambda t: t * t
    combo = gl_deriv(lambda t: 2.0 * t + 3.0 * t * t, q, x, 0.0, h=1e-3)
    parts = 2.0 * gl_deriv(f, q, x, 0.0, h=1e-3) + 3.0 * gl_deriv(g, q, x, 0.0, h=1e-3)
    # the h^-q prefactor amplifies summation round-off near q = 2
    assert combo == pytest.approx(parts, rel=1e-9, abs=1e-9)


def test_first_order_convergence():
    # halving h should roughly halve the error on a smooth integrand
    exact = math.gamma(3.0) / math.gamma(2.5) * 2.0 ** 1.5
    errs = [
        abs(gl_deriv(lambda t: t * t, 0.5, 2.0, 0.0, h=h) - exact)
        for h in (1e-2, 5e-3)
    ]
    order = math.log2(errs[0] / errs[1])
    assert order == pytest.approx(1.0, abs=0.2)


# ---------------------------------------------------------------------------
# domain policy


def test_rejects_point_at_or_below_anchor():
    with pytest.raises(ValueError):
        gl_deriv(lambda t: t, 0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        gl_deriv(lambda t: t, 0.5, -1.0, 0.0)


def test_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        gl_deriv(lambda t: t, 0.5, 1.0, 0.0, h=0.0)


def test_rejects_too_few_nodes():
    with pytest.raises(ValueError) as exc:
        gl_deriv(lambda t: t, 0.5, 1.0, 0.0, h=0.5)
    assert str(MIN_STEPS) in str(exc.value)


def test_singular_anchor_node_is_dropped():
    # t^-0.5 blows up at the anchor only; the quadrature skips that node
    got = gl_deriv(lambda t: np.asarray(t) ** -0.5, 0.5, 1.0, 0.0, h=1e-4)
    assert math.isfinite(got)
    # annihilated by the half derivative, up to the skipped-node defect
    assert got == pytest.approx(0.0, abs=1e-2)


def test_interior_singularity_rejected():
    f = lambda t: np.asarray(t) ** -0.5 + 1.0 / (np.asarray(t) - 0.5)
    with pytest.raises(QuadratureDomainError):
        gl_deriv(f, 0.5, 1.0, 0.0, h=1e-3)


# ---------------------------------------------------------------------------
# Richardson extrapolation


def test_richardson_half_derivative_tightens():
    r = richardson(lambda t: t, 0.5, 1.0, 0.0, h0=1e-4, levels=3)
    assert r.converged
    assert r.value == pytest.approx(2.0 / SQRT_PI, abs=1e-6)


def test_richardson_endpoint_singular_derivative():
    # D^0.5 t^0.5 at t=1 is gamma(1.5); the integrand is edge-singular, so
    # the tolerance is looser than in the smooth case
    r = richardson(lambda t: np.sqrt(np.abs(t)), 0.5, 1.0, 0.0, h0=1e-4, levels=3)
    assert r.value == pytest.approx(0.8862269254527580, abs=1e-4)


def test_richardson_order_zero_is_exact():
    f = lambda t: np.exp(t)
    r = richardson(f, 0.0, 0.7, 0.0, h0=1e-3, levels=2)
    assert r.value == math.exp(0.7)
    assert r.error_estimate == 0.0


def test_richardson_beats_plain_sum():
    exact = 2.0 / SQRT_PI
    plain = abs(gl_deriv(lambda t: t, 0.5, 1.0, 0.0, h=1e-3) - exact)
    extra = abs(richardson(lambda t: t, 0.5, 1.0, 0.0, h0=1e-3, levels=3).value - exact)
    assert extra < plain / 100.0


def test_richardson_levels_validated():
    for bad in (1, 6):
        with pytest.raises(ValueError):
            richardson(lambda t: t, 0.5, 1.0, 0.0, levels=bad)


def test_richardson_warns_when_table_disagrees():
    # a strongly edge-singular integrand with a coarse grid defeats the
    # whole-power error model behind the extrapolation table
    with pytest.warns(NonConvergenceWarning):
        r = richardson(lambda t: np.sqrt(np.abs(t)), 0.5, 1.0, 0.0, h0=0.2, levels=5)
    assert not r.converged


# ---------------------------------------------------------------------------
# coordinate-line helpers


def test_gl_partial_whole_order():
    f = lambda v: v[0] * v[1]
    assert gl_partial(f, 1, 1.0, (2.0, 3.0), 0.0, h=1e-4) == pytest.approx(2.0, rel=1e-9)


def test_gl_partial_fractional():
    f = lambda v: v[0] ** 2 * v[1]
    # D_y^0.5 (x^2 y) at (2, 1) = 4 * 2/sqrt(pi)
    got = gl_partial(f, 1, 0.5, (2.0, 1.0), 0.0, h=1e-4)
    assert got == pytest.approx(4.0 * 2.0 / SQRT_PI, rel=1e-3)


def test_richardson_partial_matches_scalar_form():
    f = lambda v: v[0] ** 1.5
    direct = richardson(lambda t: np.asarray(t) ** 1.5, 0.5, 2.0, 0.0, h0=1e-3)
    lifted = richardson_partial(f, 0, 0.5, (2.0,), 0.0, h0=1e-3)
    assert lifted.value == direct.value


def test_expr_univariate_slices_along_a_coordinate():
    ctx = Context.of(("x", "y"))
    e = monomial(ctx, 3.0, {0: 2.0, 1: 1.0})
    line = expr_univariate(e, ctx, "y", (2.0, 999.0))
    assert line(np.float64(5.0)) == pytest.approx(60.0, rel=1e-14)


def test_expr_univariate_singular_samples_are_nan():
    ctx = Context.of(("x",))
    e = monomial(ctx, 1.0, {0: -0.5})
    line = expr_univariate(e, ctx, "x", (1.0,))
    vals = line(np.array([0.0, 1.0]))
    assert not np.isfinite(vals[0])
    assert vals[1] == pytest.approx(1.0)
