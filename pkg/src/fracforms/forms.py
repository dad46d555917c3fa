"""Fractional differential forms over the power-product expression class.

A form of grade k is a finite sum of coefficient expressions attached to
wedge words, where each word is an ordered product of differential factors
``d(coord, order)`` with positive real order.  Words anticommute factor by
factor: swapping two adjacent factors flips the sign, a word containing two
factors with the same coordinate *and* the same order is zero, and order-0
factors are identified with the scalar unit and removed (that is the only
reading under which an order-0 exterior derivative of a scalar stays a
scalar).  Every word in one form must carry the same number of factors and
the same total order; the factor orders themselves may differ word to word.

Text syntax (whitespace insignificant)::

    form  := fterm (("+"|"-") fterm)*
    fterm := [coefficient-term] wedge?
    wedge := "d(" coord "," signed_number ")" ("&" "d(" coord "," signed_number ")")*

where ``coefficient-term`` is a single product term of the expression
grammar; a sum-valued coefficient is written by repeating the wedge word.
A literal with no wedge part is a grade-0 form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParseError
from .rl import rl_deriv
from .symbolic import (
    EXP_TOL,
    Context,
    Expr,
    PowerTerm,
    _Parser,
    canonicalize,
    exprs_close,
    fmt_number,
    is_zero,
    print_expr,
)


@dataclass(frozen=True)
class DiffFactor:
    """One differential factor d(coord, order) with order > 0."""

    coord: int
    order: float

    def __post_init__(self):
        object.__setattr__(self, "order", float(self.order))
        if self.order < -EXP_TOL:
            raise ValueError(f"differential order must be >= 0, got {self.order}")

    def key(self) -> tuple[int, float]:
        return (self.coord, round(self.order, 9))


@dataclass(frozen=True)
class WedgeWord:
    """Factors sorted ascending by (coord, order); equality is by rounded key."""

    factors: tuple[DiffFactor, ...]

    def key(self) -> tuple[tuple[int, float], ...]:
        return tuple(f.key() for f in self.factors)

    def __eq__(self, other):
        if not isinstance(other, WedgeWord):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def grade(self) -> int:
        return len(self.factors)

    @property
    def order_sum(self) -> float:
        return sum(f.order for f in self.factors)


def canonical_word(factors: Iterable[DiffFactor]) -> tuple[int, WedgeWord | None]:
    """Sort factors, returning (permutation sign, word) or (0, None) for zero.

    Order-0 factors are dropped before sorting.  The sign is the parity of
    the sorting permutation; a repeated (coord, order) pair makes the word
    the zero word.
    """
    fs = [f for f in factors if abs(f.order) > EXP_TOL]
    keys = [f.key() for f in fs]
    sign = 1
    # insertion sort, counting transpositions of adjacent factors
    for i in range(1, len(fs)):
        j = i
        while j > 0 and keys[j - 1] > keys[j]:
            keys[j - 1], keys[j] = keys[j], keys[j - 1]
            fs[j - 1], fs[j] = fs[j], fs[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(keys, keys[1:]):
        if a == b:
            return 0, None
    return sign, WedgeWord(tuple(fs))


class Form:
    """A uniform-grade, uniform-total-order sum of coefficient-weighted words."""

    __slots__ = ("grade", "total_order", "terms")

    def __init__(self, grade: int, total_order: float, terms: Mapping[WedgeWord, Expr]):
        cleaned: dict[WedgeWord, Expr] = {}
        for word, coeff in terms.items():
            if word.grade != grade:
                raise ValueError(
                    f"word of grade {word.grade} inside a grade-{grade} form"
                )
            if abs(word.order_sum - total_order) > EXP_TOL * max(1, grade):
                raise ValueError(
                    f"word order sum {word.order_sum} != form total order {total_order}"
                )
            coeff = canonicalize(coeff)
            if coeff.terms:
                cleaned[word] = coeff
        self.grade = grade
        self.total_order = float(total_order)
        self.terms = dict(sorted(cleaned.items(), key=lambda kv: kv[0].key()))

    @classmethod
    def zero(cls, grade: int = 0, total_order: float = 0.0) -> "Form":
        return cls(grade, total_order, {})

    @classmethod
    def scalar(cls, e: Expr) -> "Form":
        return cls(0, 0.0, {WedgeWord(()): e})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: WedgeWord, n: int) -> Expr:
        return self.terms.get(word, Expr.zero(n))

    def component(self, coord: int, n: int) -> Expr:
        """Grade-1 coefficient attached to d(coord, total_order)."""
        if self.grade != 1:
            raise ValueError("components are defined for grade-1 forms")
        return self.coefficient(WedgeWord((DiffFactor(coord, self.total_order),)), n)

    def _binary_check(self, other: "Form"):
        if self.grade != other.grade or abs(self.total_order - other.total_order) > EXP_TOL:
            raise ValueError("forms of different grade or total order cannot be combined")

    def __add__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        if self.is_zero and not other.is_zero:
            return other
        if other.is_zero:
            return self
        self._binary_check(other)
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            out[word] = out[word] + coeff if word in out else coeff
        return Form(self.grade, self.total_order, out)

    def __neg__(self) -> "Form":
        return Form(self.grade, self.total_order,
                    {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scale) -> "Form":
        if not isinstance(scale, (int, float, Expr)):
            return NotImplemented
        return Form(self.grade, self.total_order,
                    {w: c * scale for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.grade == other.grade
                and abs(self.total_order - other.total_order) <= EXP_TOL
                and self.terms == other.terms)

    def __repr__(self):
        return f"Form(grade={self.grade}, total_order={self.total_order}, words={len(self.terms)})"


def forms_close(a: Form, b: Form, tol: float = 1e-12) -> bool:
    """Canonical equality up to a coefficient tolerance."""
    if a.grade != b.grade or abs(a.total_order - b.total_order) > EXP_TOL:
        return False
    words = set(a.terms) | set(b.terms)
    for w in words:
        ca = a.terms.get(w)
        cb = b.terms.get(w)
        if ca is None or cb is None:
            other = cb if ca is None else ca
            if any(abs(t.coeff) > tol for t in other.terms):
                return False
            continue
        if not exprs_close(ca, cb, tol):
            return False
    return True


def wedge(a: Form, b: Form) -> Form:
    """Graded exterior product; bilinear over coefficient expressions."""
    grade = a.grade + b.grade
    order = a.total_order + b.total_order
    out: dict[WedgeWord, Expr] = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            sign, word = canonical_word(wa.factors + wb.factors)
            if word is None:
                continue
            coeff = (ca * cb) * float(sign)
            out[word] = out[word] + coeff if word in out else coeff
    return Form(grade, order, out)


def frac_exterior_deriv(a: Form | Expr, nu: float, ctx: Context) -> Form:
    """Fractional exterior derivative of order nu >= 0.

    Each coefficient is differintegrated along every coordinate and the new
    factor d(coord, nu) is prepended to the word.  At nu = 0 the new factors
    collapse into the scalar unit, so the grade does not change and each
    coefficient simply picks up one copy per coordinate.
    """
    nu = float(nu)
    if nu < 0:
        raise ValueError(f"exterior derivative order must be >= 0, got {nu}")
    if isinstance(a, Expr):
        a = Form.scalar(a)
    raises_grade = nu > EXP_TOL
    grade = a.grade + (1 if raises_grade else 0)
    order = a.total_order + nu
    out: dict[WedgeWord, Expr] = {}
    for word, coeff in a.terms.items():
        for j in range(ctx.n):
            dc = rl_deriv(coeff, j, nu, ctx)
            if is_zero(dc):
                continue
            sign, new_word = canonical_word((DiffFactor(j, nu),) + word.factors)
            if new_word is None:
                continue
            piece = dc * float(sign)
            out[new_word] = out[new_word] + piece if new_word in out else piece
    return Form(grade, order, out)


# --- text and JSON front ends ----------------------------------------------

def _parse_wedge(p: _Parser) -> list[DiffFactor]:
    factors = []
    while True:
        kind, val, pos = p.peek()
        if kind == "ident" and val == "d":
            save = p.i
            p.next()
            if not p.at_op("("):
                p.i = save
                break
            p.next()
            kind, cname, cpos = p.next()
            if kind != "ident":
                raise ParseError(f"expected a coordinate inside d(...), found {cname!r}", cpos)
            idx = p.ctx.index(cname)
            p.expect_op(",")
            order = p.parse_signed_number()
            p.expect_op(")")
            factors.append(DiffFactor(idx, order))
            if p.at_op("&"):
                p.next()
                continue
            break
        break
    return factors


def _looks_like_diff(p: _Parser) -> bool:
    kind, val, _ = p.peek()
    if kind != "ident" or val != "d":
        return False
    nxt = p.tokens[p.i + 1]
    return nxt[0] == "op" and nxt[1] == "("


def parse_form(text: str, ctx: Context) -> Form:
    """Parse a form literal; a bare expression is a grade-0 form."""
    p = _Parser(text, ctx)
    pieces: list[tuple[PowerTerm, list[DiffFactor]]] = []
    sign = 1.0
    while True:
        if _looks_like_diff(p):
            coeff_term = PowerTerm(sign, (0.0,) * ctx.n)
        else:
            coeff_term = p.parse_term(sign)
        factors = _parse_wedge(p) if _looks_like_diff(p) else []
        pieces.append((coeff_term, factors))
        if p.at_op("+") or p.at_op("-"):
            _, val, _ = p.next()
            sign = -1.0 if val == "-" else 1.0
            continue
        break
    p.expect_end()

    grades = {len(fs) for _, fs in pieces}
    if len(grades) != 1:
        raise ParseError("every term of a form must carry the same number of differentials")
    grade = grades.pop()
    accum: dict[WedgeWord, Expr] = {}
    total_order = None
    for coeff_term, factors in pieces:
        wsign, word = canonical_word(factors)
        if word is None:
            continue
        if total_order is None:
            total_order = word.order_sum
        elif abs(word.order_sum - total_order) > EXP_TOL * max(1, grade):
            raise ParseError("every term of a form must carry the same total order")
        coeff = Expr((PowerTerm(coeff_term.coeff * wsign, coeff_term.exponents),), ctx.n)
        accum[word] = accum[word] + coeff if word in accum else canonicalize(coeff)
    if total_order is None:
        total_order = 0.0
        if grade:
            # every explicit word cancelled to zero
            return Form(grade, 0.0, {})
    return Form(grade, total_order, accum)


def _word_text(word: WedgeWord, ctx: Context, digits: int | None) -> str:
    return " & ".join(
        f"d({ctx.names[f.coord]},{fmt_number(f.order, digits)})" for f in word.factors
    )


def print_form(form: Form, ctx: Context, digits: int | None = None) -> str:
    """Render in the form-literal syntax (sum coefficients are expanded)."""
    if form.is_zero:
        return "0"
    if form.grade == 0:
        return print_expr(form.terms[WedgeWord(())], ctx, digits)
    chunks: list[str] = []
    from .symbolic import _term_text

    for word, coeff in form.terms.items():
        wtxt = _word_text(word, ctx, digits)
        for t in coeff.terms:
            body = _term_text(t, ctx, digits)
            piece = wtxt if body == "1" else f"{body} {wtxt}"
            if chunks:
                chunks.append((" - " if t.coeff < 0 else " + ") + piece)
            elif t.coeff >= 0:
                chunks.append(piece)
            elif body == "1":
                chunks.append(f"-1 {wtxt}")
            elif body[0].isdigit() or body[0] == ".":
                chunks.append("-" + piece)
            else:
                # the grammar wants a number right after a leading minus
                chunks.append(f"-1*{body} {wtxt}")
    return "".join(chunks)


def form_to_json(form: Form, ctx: Context) -> dict:
    terms = []
    for word, coeff in form.terms.items():
        terms.append({
            "sign": 1,
            "factors": [
                {"coord": ctx.names[f.coord], "order": f.order} for f in word.factors
            ],
            "coeff": print_expr(coeff, ctx),
        })
    return {"grade": form.grade, "total_order": form.total_order, "terms": terms}


def form_from_json(obj: dict, ctx: Context) -> Form:
    from .symbolic import parse_expr

    accum: dict[WedgeWord, Expr] = {}
    for item in obj["terms"]:
        factors = [DiffFactor(ctx.index(f["coord"]), float(f["order"]))
                   for f in item["factors"]]
        sign, word = canonical_word(factors)
        if word is None:
            continue
        coeff = parse_expr(item["coeff"], ctx) * float(item.get("sign", 1)) * float(sign)
        accum[word] = accum[word] + coeff if word in accum else coeff
    return Form(int(obj["grade"]), float(obj["total_order"]), accum)
