"""Power-product expressions: canonical form, parse/print, eval, derivative."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracforms import (
    Context,
    EvalDomainError,
    Expr,
    ParseError,
    PowerTerm,
    UnknownCoordinateError,
    canonicalize,
    classical_derivative,
    eval_expr,
    exprs_close,
    monomial,
    parse_expr,
    print_expr,
)

X = Context.of(("x",))
XY = Context.of(("x", "y"))


# ---------------------------------------------------------------------------
# canonicalization


def test_canonicalize_merges_equal_exponents():
    e = canonicalize(Expr((PowerTerm(1.0, (0.5,)), PowerTerm(2.0, (0.5,))), 1))
    assert e.terms == (PowerTerm(3.0, (0.5,)),)


def test_canonicalize_merges_within_exponent_tolerance():
    e = canonicalize(Expr((PowerTerm(1.0, (0.5,)), PowerTerm(2.0, (0.5 + 1e-10,))), 1))
    assert len(e.terms) == 1
    assert e.terms[0].coeff == 3.0


def test_canonicalize_keeps_separated_exponents():
    e = canonicalize(Expr((PowerTerm(1.0, (0.3,)), PowerTerm(1.0, (0.7,))), 1))
    assert len(e.terms) == 2


def test_canonicalize_drops_tiny_coefficients():
    e = canonicalize(Expr((PowerTerm(1e-13, (1.0,)),), 1))
    assert e.terms == ()


def test_canonicalize_cancellation_gives_zero():
    e = canonicalize(Expr((PowerTerm(1.0, (1.0,)), PowerTerm(-1.0, (1.0,))), 1))
    assert e.terms == ()


def test_canonicalize_orders_terms_deterministically():
    a = canonicalize(Expr((PowerTerm(2.0, (1.0, 0.0)), PowerTerm(-3.0, (0.0, 0.5))), 2))
    b = canonicalize(Expr((PowerTerm(-3.0, (0.0, 0.5)), PowerTerm(2.0, (1.0, 0.0))), 2))
    assert a == b


def test_canonicalize_idempotent():
    e = canonicalize(Expr((PowerTerm(1.0, (0.5,)), PowerTerm(2.0, (0.5 + 1e-10,))), 1))
    assert canonicalize(e) == e


# ---------------------------------------------------------------------------
# parse / print


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x", "x"),
        ("3*x^2", "3*x^2"),
        ("x^0.5*y^-0.5", "x^0.5*y^-0.5"),
        ("2*x + 3*y", "3*y + 2*x"),
        ("x - y", "-1*y + x"),
        ("-1*x^2", "-1*x^2"),
        ("5", "5"),
        ("0", "0"),
        ("  x ^ 2  ", "x^2"),
        ("1.5e-2*x", "0.015*x"),
    ],
)
def test_parse_then_print(text, expected):
    assert print_expr(parse_expr(text, XY), XY) == expected


def test_print_trims_digits():
    e = monomial(X, 0.5641895835477563, {0: -0.5})
    assert print_expr(e, X, digits=10) == "0.5641895835*x^-0.5"
    assert print_expr(e, X) == "0.5641895835477563*x^-0.5"


def test_print_integer_coefficients_bare():
    assert print_expr(monomial(X, 3.0, {0: 2.0}), X) == "3*x^2"
    assert print_expr(monomial(X, -1.0, {}), X) == "-1"


@pytest.mark.parametrize(
    "text",
    ["", "x +", "^2", "x^^2", "3*", "x y", "(x", "x^2.5.3", "-x^2"],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(ParseError):
        parse_expr(text, X)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_expr("2*x + ^", X)
    assert "6" in str(exc.value)


def test_parse_unknown_coordinate():
    with pytest.raises(UnknownCoordinateError):
        parse_expr("x + z", XY)


def test_parse_merges_repeated_factors():
    # x*x^0.5 collapses to a single power
    e = parse_expr("x*x^0.5", X)
    assert e.terms == (PowerTerm(1.0, (1.5,)),)


coeffs = st.floats(min_value=-50.0, max_value=50.0).filter(lambda c: abs(c) > 1e-6)
exps = st.floats(min_value=-3.0, max_value=6.0)


@st.composite
def exprs(draw, n=2):
    k = draw(st.integers(min_value=0, max_value=4))
    terms = tuple(
        PowerTerm(draw(coeffs), tuple(draw(exps) for _ in range(n))) for _ in range(k)
    )
    return canonicalize(Expr(terms, n))


@given(exprs())
@settings(max_examples=500, deadline=None)
def test_print_parse_round_trip(e):
    assert parse_expr(print_expr(e, XY), XY) == e


# ---------------------------------------------------------------------------
# evaluation


def test_eval_simple():
    e = parse_expr("3*x^2*y^-0.5", XY)
    assert eval_expr(e, XY, (2.0, 4.0)) == pytest.approx(6.0, rel=1e-14)


def test_eval_constant_ignores_point():
    e = parse_expr("7", XY)
    assert eval_expr(e, XY, (123.0, -9.0)) == 7.0


def test_eval_zero_expr():
    assert eval_expr(Expr.zero(2), XY, (1.0, 1.0)) == 0.0


def test_eval_respects_origin_shift():
    ctx = Context.of(("x",), origin=(1.0,))
    e = parse_expr("x^2", ctx)
    # powers are taken in (x - a)
    assert eval_expr(e, ctx, (3.0,)) == pytest.approx(4.0, rel=1e-14)


def test_eval_negative_base_fractional_power_rejected():
    e = parse_expr("x^0.5", X)
    with pytest.raises(EvalDomainError):
        eval_expr(e, X, (-1.0,))


def test_eval_zero_base_negative_power_rejected():
    e = parse_expr("x^-1", X)
    with pytest.raises(EvalDomainError):
        eval_expr(e, X, (0.0,))


def test_eval_zero_base_whole_power_is_zero():
    assert eval_expr(parse_expr("x^2", X), X, (0.0,)) == 0.0


def test_eval_zero_base_fractional_power_rejected():
    # non-integer exponents need a strictly positive base
    with pytest.raises(EvalDomainError):
        eval_expr(parse_expr("x^0.5", X), X, (0.0,))


@given(exprs(), exprs(), st.floats(min_value=0.1, max_value=3.0),
       st.floats(min_value=0.1, max_value=3.0))
@settings(max_examples=200, deadline=None)
def test_eval_additivity(e1, e2, px, py):
    total = canonicalize(Expr(e1.terms + e2.terms, 2))
    lhs = eval_expr(total, XY, (px, py))
    rhs = eval_expr(e1, XY, (px, py)) + eval_expr(e2, XY, (px, py))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# classical derivative


def test_classical_derivative_power_rule():
    e = parse_expr("x^3", X)
    assert print_expr(classical_derivative(e, 0), X) == "3*x^2"


def test_classical_derivative_constant_is_zero():
    assert classical_derivative(parse_expr("4", X), 0).terms == ()


def test_classical_derivative_higher_order():
    e = parse_expr("x^4", X)
    assert print_expr(classical_derivative(e, 0, 2), X) == "12*x^2"


def test_classical_derivative_partial():
    e = parse_expr("x^2*y^3", XY)
    assert exprs_close(classical_derivative(e, 1), parse_expr("3*x^2*y^2", XY))


def test_classical_derivative_fractional_exponent():
    e = parse_expr("x^0.5", X)
    d = classical_derivative(e, 0)
    assert exprs_close(d, parse_expr("0.5*x^-0.5", X))


@given(exprs(n=1), st.floats(min_value=0.5, max_value=2.5))
@settings(max_examples=150, deadline=None)
def test_classical_derivative_matches_central_difference(e, x):
    h = 1e-5
    try:
        want = (eval_expr(e, X, (x + h,)) - eval_expr(e, X, (x - h,))) / (2.0 * h)
        got = eval_expr(classical_derivative(e, 0), X, (x,))
    except EvalDomainError:
        return
    scale = max(1.0, abs(want), abs(got))
    # central differences carry O(h^2) truncation plus cancellation noise
    assert abs(got - want) <= 1e-6 * scale + 1e-4 * h * h * scale


# ---------------------------------------------------------------------------
# helpers on Expr


def test_expr_pow_scales_exponents():
    base = parse_expr("x*y", XY)
    assert exprs_close(base.pow(0.5), parse_expr("x^0.5*y^0.5", XY))


def test_expr_pow_expands_whole_powers_of_sums():
    got = parse_expr("x + y", XY).pow(2.0)
    assert exprs_close(got, parse_expr("x^2 + 2*x*y + y^2", XY))


def test_expr_pow_fractional_needs_single_term():
    from fracforms import UnsupportedError

    with pytest.raises(UnsupportedError):
        parse_expr("x + y", XY).pow(0.5)


def test_monomial_by_name():
    assert monomial(XY, 2.0, {"y": 1.5}) == monomial(XY, 2.0, {1: 1.5})


def test_context_lookup_and_origin_default():
    assert XY.index("y") == 1
    assert XY.initial_points == (0.0, 0.0)
    with pytest.raises(UnknownCoordinateError):
        XY.index("z")
