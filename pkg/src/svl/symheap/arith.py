"""Polynomials and rational functions over named variables.

Used both to normalise ite-free arithmetic terms into a canonical shape and
to feed linear constraints to the solver.
"""

from __future__ import annotations

from fractions import Fraction as Q

from . import terms as T

Mono = tuple  # sorted tuple of (name, exponent)


class NonArithmetic(Exception):
    """Term contains a construct the polynomial layer cannot represent."""


def _mono_mul(a: Mono, b: Mono) -> Mono:
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @staticmethod
    def const(c) -> "Poly":
        return Poly({(): Q(c)})

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly({((name, 1),): Q(1)})

    def is_const(self) -> bool:
        return all(m == () for m in self.terms)

    def const_value(self) -> Q:
        return self.terms.get((), Q(0))

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, o: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out.get(m, Q(0)) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, o: "Poly") -> "Poly":
        return self + (-o)

    def __mul__(self, o: "Poly") -> "Poly":
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Q(0)) + c1 * c2
        return Poly(out)

    def scale(self, c: Q) -> "Poly":
        return Poly({m: v * c for m, v in self.terms.items()})

    def __eq__(self, o) -> bool:
        return isinstance(o, Poly) and self.terms == o.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def leading(self) -> Q:
        if not self.terms:
            return Q(0)
        return self.terms[self.ordered()[0]]

    def ordered(self) -> list:
        return sorted(self.terms, key=lambda m: (-sum(e for _, e in m), m))

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def is_linear(self) -> bool:
        return all(len(m) <= 1 and all(e == 1 for _, e in m) for m in self.terms)

    def common_var_factor(self) -> Mono:
        """Largest monomial dividing every term."""
        ms = list(self.terms)
        if not ms:
            return ()
        common = dict(ms[0])
        for m in ms[1:]:
            d = dict(m)
            common = {v: min(e, d[v]) for v, e in common.items() if v in d}
        return tuple(sorted(common.items()))

    def divide_mono(self, f: Mono) -> "Poly":
        out = {}
        fd = dict(f)
        for m, c in self.terms.items():
            d = dict(m)
            for v, e in fd.items():
                d[v] -= e
            out[tuple(sorted((v, e) for v, e in d.items() if e))] = c
        return Poly(out)

    def substitute(self, name: str, value: Q) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            rest = []
            for v, e in m:
                if v == name:
                    c = c * value ** e
                else:
                    rest.append((v, e))
            key = tuple(rest)
            out[key] = out.get(key, Q(0)) + c
        return Poly(out)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, m in enumerate(self.ordered()):
            c = self.terms[m]
            sign = "-" if c < 0 else "+"
            a = abs(c)
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not body:
                txt = _qstr(a)
            elif a == 1:
                txt = body
            else:
                txt = f"{_qstr(a)}*{body}"
            if i == 0:
                parts.append(("-" if sign == "-" else "") + txt)
            else:
                parts.append(f" {sign} {txt}")
        return "".join(parts)


def _qstr(q: Q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class RatFn:
    """Quotient ``num / den`` kept in a light canonical form."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        den = den if den is not None else Poly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_const():
            num, den = num.scale(1 / den.const_value()), Poly.const(1)
        else:
            f = _mono_gcd(num.common_var_factor(), den.common_var_factor()) if not num.is_zero() else ()
            if f:
                num, den = num.divide_mono(f), den.divide_mono(f)
            lead = den.leading()
            num, den = num.scale(1 / lead), den.scale(1 / lead)
            if num.is_zero():
                den = Poly.const(1)
            elif num == den:
                num, den = Poly.const(1), Poly.const(1)
        self.num, self.den = num, den

    def __add__(self, o: "RatFn") -> "RatFn":
        if self.den == o.den:
            return RatFn(self.num + o.num, self.den)
        return RatFn(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self) -> "RatFn":
        return RatFn(-self.num, self.den)

    def __sub__(self, o: "RatFn") -> "RatFn":
        return self + (-o)

    def __mul__(self, o: "RatFn") -> "RatFn":
        return RatFn(self.num * o.num, self.den * o.den)

    def __truediv__(self, o: "RatFn") -> "RatFn":
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero")
        return RatFn(self.num * o.den, self.den * o.num)

    def is_poly(self) -> bool:
        return self.den.is_const()

    def is_const(self) -> bool:
        return self.is_poly() and self.num.is_const()

    def __eq__(self, o) -> bool:
        return isinstance(o, RatFn) and self.num == o.num and self.den == o.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.is_poly():
            return str(self.num)
        n, d = str(self.num), str(self.den)
        if len(self.num.terms) > 1:
            n = f"({n})"
        if len(self.den.terms) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"


def _mono_gcd(a: Mono, b: Mono) -> Mono:
    db = dict(b)
    return tuple((v, min(e, db[v])) for v, e in a if v in db)


def to_ratfn(t: T.Term) -> RatFn:
    """Convert an ite-free arithmetic term."""
    if isinstance(t, T.Num):
        return RatFn(Poly.const(t.value))
    if isinstance(t, T.Sym):
        return RatFn(Poly.var(t.name))
    if isinstance(t, T.Bin):
        a, b = to_ratfn(t.left), to_ratfn(t.right)
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        if t.op == "*":
            return a * b
        if t.op == "/":
            if b.num.is_zero():
                raise NonArithmetic("division by zero")
            return a / b
    if isinstance(t, T.Neg):
        return -to_ratfn(t.operand)
    raise NonArithmetic(str(t))


def poly_term(p: Poly, sorts: dict) -> T.Term:
    out: T.Term = T.ZERO
    for m in p.ordered():
        c = p.terms[m]
        mono: T.Term = T.ONE
        for v, e in m:
            for _ in range(e):
                mono = T.mul(mono, T.Sym(v, sorts.get(v, "int")))
        if c < 0:
            piece = T.mul(T.Num(-c), mono)
            out = T.sub(out, piece) if out != T.ZERO else T.neg(piece)
        else:
            out = T.add(out, T.mul(T.Num(c), mono))
    return out


def from_ratfn(r: RatFn, sorts: dict) -> T.Term:
    n = poly_term(r.num, sorts)
    if r.is_poly():
        return n
    return T.div(n, poly_term(r.den, sorts))


def normalize(t: T.Term) -> T.Term:
    """Canonical form of an arithmetic term; leaves non-arithmetic terms as they are."""
    if isinstance(t, (T.Num, T.Sym)):
        return t
    if T.sort_of(t) not in ("int", "frac") or T.has_ite(t):
        return t
    try:
        r = to_ratfn(t)
    except (NonArithmetic, ZeroDivisionError):
        return t
    return from_ratfn(r, T.symbols(t))


def render(t: T.Term) -> str:
    """Human readable rendering, e.g. ``1/num``."""
    if isinstance(t, T.Num):
        return _qstr(t.value)
    if T.sort_of(t) in ("int", "frac") and not T.has_ite(t):
        try:
            return str(to_ratfn(t))
        except (NonArithmetic, ZeroDivisionError):
            pass
    return str(t)


__all__ = ["Poly", "RatFn", "NonArithmetic", "to_ratfn", "from_ratfn", "normalize", "render"]
