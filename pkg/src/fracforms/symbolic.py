"""Closed symbolic class: finite sums of generalized power products.

An expression is a finite sum of terms ``c * prod_i (x_i - a_i)^(p_i)`` with
real coefficients and real exponents.  The class is closed under addition,
multiplication, classical differentiation, and the fractional operators in
:mod:`fracforms.rl`.  Initial points ``a_i`` live on the :class:`Context`,
never on the terms themselves.

Text grammar (whitespace insignificant)::

    expr    := term (("+"|"-") term)*
    term    := signed_number ("*" factor)* | factor ("*" factor)*
    factor  := coord ("^" signed_number)?

Coefficients and exponents are plain doubles.  Canonicalization merges terms
whose exponent vectors agree within 1e-9 per coordinate, drops coefficients
below 1e-12 in magnitude, and sorts terms lexicographically by exponent
vector, so equal expressions have identical representations.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from .errors import (
    BoundarySingularityError,
    EvalDomainError,
    ParseError,
    UnknownCoordinateError,
    UnsupportedError,
)
from .specialfn import snap_int

EXP_TOL = 1e-9      # exponent merge / snap tolerance
COEFF_DROP = 1e-12  # coefficients strictly below this are dropped


def fmt_number(x: float, digits: int | None = None) -> str:
    """Format a double so the grammar can read it back.

    With ``digits`` set this is a display format (CLI uses 10 significant
    digits); without it the shortest exact representation is used, expanded
    to positional notation because the grammar has no exponent literals.
    """
    if digits is not None:
        return f"{x:.{digits}g}"
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    r = repr(float(x))
    if "e" in r or "E" in r:
        return format(Decimal(r), "f")
    return r


@dataclass(frozen=True)
class Context:
    """Coordinate names plus the initial point a_i of each coordinate."""

    names: tuple[str, ...]
    initial_points: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "initial_points", tuple(float(a) for a in self.initial_points))
        if len(self.names) != len(set(self.names)):
            raise ValueError("coordinate names must be distinct")
        if not self.names:
            raise ValueError("a context needs at least one coordinate")
        if len(self.initial_points) != len(self.names):
            raise ValueError("one initial point per coordinate")
        for name in self.names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"bad coordinate name {name!r}")

    @classmethod
    def of(cls, names: str | Sequence[str], origin: Sequence[float] | None = None) -> "Context":
        if isinstance(names, str):
            names = [s.strip() for s in names.split(",") if s.strip()]
        names = tuple(names)
        if origin is None:
            origin = (0.0,) * len(names)
        return cls(names, tuple(origin))

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, coord: int | str) -> int:
        if isinstance(coord, str):
            try:
                return self.names.index(coord)
            except ValueError:
                raise UnknownCoordinateError(f"unknown coordinate {coord!r}") from None
        if not 0 <= coord < self.n:
            raise UnknownCoordinateError(f"coordinate index {coord} out of range")
        return coord

    def at_origin(self) -> bool:
        return all(a == 0.0 for a in self.initial_points)


@dataclass(frozen=True)
class PowerTerm:
    """One term c * prod_i (x_i - a_i)^(p_i); exponents are dense over the context."""

    coeff: float
    exponents: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", float(self.coeff))
        object.__setattr__(self, "exponents", tuple(float(p) for p in self.exponents))
        if not math.isfinite(self.coeff):
            raise ValueError("term coefficient must be finite")
        for p in self.exponents:
            if not math.isfinite(p):
                raise ValueError("term exponent must be finite")

    def key(self) -> tuple[float, ...]:
        return tuple(round(p, 9) for p in self.exponents)


@dataclass(frozen=True)
class Expr:
    """Canonical finite sum of :class:`PowerTerm`; build via the helpers below."""

    terms: tuple[PowerTerm, ...]
    n: int

    @classmethod
    def zero(cls, n: int) -> "Expr":
        return cls((), n)

    @classmethod
    def constant(cls, c: float, n: int) -> "Expr":
        return canonicalize(cls((PowerTerm(c, (0.0,) * n),), n))

    @classmethod
    def make(cls, pairs: Iterable[tuple[float, Sequence[float]]], n: int) -> "Expr":
        terms = tuple(PowerTerm(c, tuple(e)) for c, e in pairs)
        for t in terms:
            if len(t.exponents) != n:
                raise ValueError("exponent vector length must match the context")
        return canonicalize(cls(terms, n))

    def _check(self, other: "Expr"):
        if self.n != other.n:
            raise ValueError("expressions live over different contexts")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Expr.constant(float(other), self.n)
        if not isinstance(other, Expr):
            return NotImplemented
        self._check(other)
        return canonicalize(Expr(self.terms + other.terms, self.n))

    __radd__ = __add__

    def __neg__(self):
        return Expr(tuple(PowerTerm(-t.coeff, t.exponents) for t in self.terms), self.n)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Expr.constant(float(other), self.n)
        if not isinstance(other, Expr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            scaled = tuple(PowerTerm(t.coeff * float(other), t.exponents) for t in self.terms)
            return canonicalize(Expr(scaled, self.n))
        if not isinstance(other, Expr):
            return NotImplemented
        self._check(other)
        prods = []
        for s in self.terms:
            for t in other.terms:
                exps = tuple(a + b for a, b in zip(s.exponents, t.exponents))
                prods.append(PowerTerm(s.coeff * t.coeff, exps))
        return canonicalize(Expr(tuple(prods), self.n))

    __rmul__ = __mul__

    def pow(self, power: float) -> "Expr":
        """Raise to a real power; closed only for whole powers or monomials."""
        k = snap_int(power)
        if k is not None and k >= 0:
            out = Expr.constant(1.0, self.n)
            for _ in range(k):
                out = out * self
            return out
        if len(self.terms) == 1:
            t = self.terms[0]
            exps = tuple(p * power for p in t.exponents)
            if k is not None:
                return canonicalize(Expr((PowerTerm(t.coeff ** k, exps),), self.n))
            if t.coeff <= 0.0:
                raise UnsupportedError(
                    "fractional power of a monomial needs a positive coefficient"
                )
            return canonicalize(Expr((PowerTerm(t.coeff ** power, exps),), self.n))
        raise UnsupportedError(
            "fractional powers are only defined for single-term power products"
        )


def canonicalize(e: Expr) -> Expr:
    """Merge like terms, drop negligible ones, sort; idempotent."""
    buckets: dict[tuple[float, ...], list] = {}
    for t in e.terms:
        exps = tuple(0.0 if abs(p) <= EXP_TOL else p for p in t.exponents)
        key = tuple(round(p, 9) for p in exps)
        if key in buckets:
            slot = buckets[key]
            # keep, per coordinate, whichever exponent sits closer to the key
            slot[0] = tuple(
                p if abs(p - k) <= abs(old - k) else old
                for old, p, k in zip(slot[0], exps, key)
            )
            slot[1] += t.coeff
        else:
            buckets[key] = [exps, t.coeff]
    kept = [
        PowerTerm(c, tuple(exps))
        for _, (exps, c) in sorted(buckets.items())
        if abs(c) >= COEFF_DROP
    ]
    return Expr(tuple(kept), e.n)


def is_zero(e: Expr) -> bool:
    return not canonicalize(e).terms


def exprs_close(e1: Expr, e2: Expr, tol: float = COEFF_DROP) -> bool:
    """True when e1 - e2 canonicalizes to nothing above ``tol``."""
    diff = canonicalize(e1 - e2)
    return all(abs(t.coeff) <= tol for t in diff.terms)


def max_abs_coeff(e: Expr) -> float:
    e = canonicalize(e)
    return max((abs(t.coeff) for t in e.terms), default=0.0)


def monomial(ctx: Context, coeff: float, powers: dict[int | str, float] | None = None) -> Expr:
    """Convenience builder: coeff * prod (x_i - a_i)^(p_i)."""
    exps = [0.0] * ctx.n
    for coord, p in (powers or {}).items():
        exps[ctx.index(coord)] = float(p)
    return Expr.make([(coeff, exps)], ctx.n)


# --- text front end -------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^(),&])"
    r")"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser shared by the expression and form grammars."""

    def __init__(self, text: str, ctx: Context):
        self.text = text
        self.ctx = ctx
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def at_op(self, op: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == op

    def parse_signed_number(self) -> float:
        sign = 1.0
        if self.at_op("+") or self.at_op("-"):
            _, val, _ = self.next()
            sign = -1.0 if val == "-" else 1.0
        kind, val, pos = self.next()
        if kind != "num":
            raise ParseError(f"expected a number, found {val or 'end of input'!r}", pos)
        return sign * float(val)

    def parse_factor(self) -> tuple[int, float]:
        kind, val, pos = self.next()
        if kind != "ident":
            raise ParseError(f"expected a coordinate, found {val or 'end of input'!r}", pos)
        try:
            idx = self.ctx.index(val)
        except UnknownCoordinateError:
            raise UnknownCoordinateError(
                f"unknown coordinate {val!r} (declared: {', '.join(self.ctx.names)})"
            ) from None
        power = 1.0
        if self.at_op("^"):
            self.next()
            power = self.parse_signed_number()
        return idx, power

    def parse_term(self, sign: float) -> PowerTerm:
        exps = [0.0] * self.ctx.n
        kind, val, _ = self.peek()
        if kind == "num" or (kind == "op" and val in "+-"):
            coeff = sign * self.parse_signed_number()
            while self.at_op("*"):
                self.next()
                idx, p = self.parse_factor()
                exps[idx] += p
        else:
            coeff = sign
            idx, p = self.parse_factor()
            exps[idx] += p
            while self.at_op("*"):
                self.next()
                idx, p = self.parse_factor()
                exps[idx] += p
        return PowerTerm(coeff, tuple(exps))

    def parse_expr(self) -> Expr:
        terms = [self.parse_term(1.0)]
        while self.at_op("+") or self.at_op("-"):
            _, val, _ = self.next()
            terms.append(self.parse_term(-1.0 if val == "-" else 1.0))
        return canonicalize(Expr(tuple(terms), self.ctx.n))

    def expect_end(self) -> None:
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", pos)


def parse_expr(text: str, ctx: Context) -> Expr:
    p = _Parser(text, ctx)
    e = p.parse_expr()
    p.expect_end()
    return e


def _term_text(t: PowerTerm, ctx: Context, digits: int | None) -> str:
    mag = abs(t.coeff)
    facs = []
    for i, p in enumerate(t.exponents):
        if p == 0.0:
            continue
        if round(p, 9) == 1.0:
            facs.append(ctx.names[i])
        else:
            facs.append(f"{ctx.names[i]}^{fmt_number(p, digits)}")
    if not facs:
        return fmt_number(mag, digits)
    if mag == 1.0:
        return "*".join(facs)
    return fmt_number(mag, digits) + "*" + "*".join(facs)


def print_expr(e: Expr, ctx: Context, digits: int | None = None) -> str:
    """Render in the input grammar; parse(print(e)) == e for canonical e."""
    e = canonicalize(e)
    if not e.terms:
        return "0"
    parts = []
    for i, t in enumerate(e.terms):
        body = _term_text(t, ctx, digits)
        if i == 0:
            if t.coeff < 0:
                # keep the leading sign on the number so the text stays in-grammar
                if body[0].isdigit() or body[0] == ".":
                    parts.append("-" + body)
                else:
                    parts.append("-1*" + body)
            else:
                parts.append(body)
        else:
            parts.append((" - " if t.coeff < 0 else " + ") + body)
    return "".join(parts)


# --- evaluation and classical calculus -------------------------------------

def eval_expr(e: Expr, ctx: Context, point: Sequence[float]) -> float:
    """Evaluate at a point; bases (x_i - a_i) must be positive wherever a
    non-integer exponent touches them."""
    if len(point) != ctx.n or e.n != ctx.n:
        raise ValueError("point length must match the context")
    vals = []
    for t in e.terms:
        v = t.coeff
        for i, p in enumerate(t.exponents):
            if p == 0.0:
                continue
            base = float(point[i]) - ctx.initial_points[i]
            k = snap_int(p)
            if base == 0.0 and p < 0:
                raise EvalDomainError(
                    f"({ctx.names[i]} - a) is zero under a negative exponent"
                )
            if k is not None:
                v *= base ** k
            else:
                if base <= 0.0:
                    raise EvalDomainError(
                        f"({ctx.names[i]} - a) = {base} is not positive under exponent {p}"
                    )
                v *= base ** p
        vals.append(v)
    return math.fsum(vals)


def classical_derivative(e: Expr, coord: int, order: int = 1) -> Expr:
    """Whole-order partial derivative by the power rule.

    A term dies exactly when its exponent hits a whole number below ``order``
    (the factor chain reaches zero); near-integer exponents are snapped so
    float dust cannot keep a dead term alive.
    """
    if order < 0 or order != int(order):
        raise ValueError("classical derivative order must be a whole number >= 0")
    out = []
    for t in e.terms:
        c = t.coeff
        p = t.exponents[coord]
        dead = False
        for step in range(int(order)):
            f = p - step
            if abs(f) <= EXP_TOL:
                dead = True
                break
            c *= f
        if dead:
            continue
        exps = list(t.exponents)
        exps[coord] = p - order
        out.append(PowerTerm(c, tuple(exps)))
    return canonicalize(Expr(tuple(out), e.n))


def restrict_at_initial(e: Expr, coord: int, ctx: Context) -> Expr:
    """Evaluate the ``coord`` factor at its initial point, keeping the rest.

    Positive exponents vanish, zero exponents drop out, and a negative
    exponent is a non-removable singularity.
    """
    out = []
    for t in e.terms:
        p = t.exponents[coord]
        if abs(p) <= EXP_TOL:
            exps = list(t.exponents)
            exps[coord] = 0.0
            out.append(PowerTerm(t.coeff, tuple(exps)))
        elif p > 0:
            continue
        else:
            raise BoundarySingularityError(
                f"exponent {p} on {ctx.names[coord]} is singular at the initial point"
            )
    return canonicalize(Expr(tuple(out), e.n))


def shift_exponent(e: Expr, coord: int, delta: float) -> Expr:
    """Multiply by (x_coord - a_coord)^delta (exponent shift on every term)."""
    out = [
        PowerTerm(t.coeff, tuple(p + delta if i == coord else p for i, p in enumerate(t.exponents)))
        for t in e.terms
    ]
    return canonicalize(Expr(tuple(out), e.n))


def degree_in(e: Expr, coord: int) -> float:
    return max((t.exponents[coord] for t in e.terms), default=0.0)


def is_polynomial_in(e: Expr, coord: int) -> bool:
    for t in e.terms:
        k = snap_int(t.exponents[coord])
        if k is None or k < 0:
            return False
    return True
