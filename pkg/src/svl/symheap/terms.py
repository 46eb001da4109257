"""Symbolic terms over integers, rationals, booleans and roles.

Constructors fold constants eagerly so that concrete computations never
leave a residue of trivial nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Union

SORTS = ("int", "frac", "bool", "role", "ref")


@dataclass(frozen=True)
class Num:
    value: Q

    def __str__(self) -> str:
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class BoolC:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class RoleC:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Sym:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Field:
    obj: "Term"
    name: str

    def __str__(self) -> str:
        return f"{self.obj}.{self.name}"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * /
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg:
    operand: "Term"

    def __str__(self) -> str:
        return f"-{self.operand}"


@dataclass(frozen=True)
class CutSub:
    """Subtraction truncated at zero."""

    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"({self.left} -. {self.right})"


@dataclass(frozen=True)
class Ite:
    cond: "Term"
    then: "Term"
    orelse: "Term"

    def __str__(self) -> str:
        return f"({self.cond} ? {self.then} : {self.orelse})"


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Not:
    operand: "Term"

    def __str__(self) -> str:
        return f"!({self.operand})"


@dataclass(frozen=True)
class And:
    items: tuple

    def __str__(self) -> str:
        return " && ".join(f"({i})" for i in self.items) if self.items else "true"


@dataclass(frozen=True)
class Or:
    items: tuple

    def __str__(self) -> str:
        return " || ".join(f"({i})" for i in self.items) if self.items else "false"


Term = Union[Num, BoolC, RoleC, Sym, Field, Bin, Neg, CutSub, Ite, Cmp, Not, And, Or]

TRUE = BoolC(True)
FALSE = BoolC(False)
ZERO = Num(Q(0))
ONE = Num(Q(1))


def num(v) -> Num:
    return Num(Q(v))


# ---------------------------------------------------------------------------
# smart constructors

def add(a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Bin("+", a, b)


def sub(a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if b == ZERO:
        return a
    if a == b:
        return ZERO
    return Bin("-", a, b)


def mul(a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Bin("*", a, b)


def div(a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if b == ONE:
        return a
    return Bin("/", a, b)


def neg(a: Term) -> Term:
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def cutsub(a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(max(a.value - b.value, Q(0)))
    if b == ZERO:
        return a
    if a == b or a == ZERO:
        return ZERO
    return CutSub(a, b)


def ite(c: Term, a: Term, b: Term) -> Term:
    if c == TRUE:
        return a
    if c == FALSE:
        return b
    if a == b:
        return a
    return Ite(c, a, b)


def cmp(op: str, a: Term, b: Term) -> Term:
    if isinstance(a, Num) and isinstance(b, Num):
        x, y = a.value, b.value
        return BoolC({"==": x == y, "!=": x != y, "<": x < y, "<=": x <= y,
                      ">": x > y, ">=": x >= y}[op])
    if isinstance(a, (RoleC, BoolC)) and isinstance(b, (RoleC, BoolC)) and op in ("==", "!="):
        return BoolC((a == b) == (op == "=="))
    if a == b and op in ("==", "<=", ">="):
        return TRUE
    if a == b and op in ("!=", "<", ">"):
        return FALSE
    return Cmp(op, a, b)


def not_(a: Term) -> Term:
    if isinstance(a, BoolC):
        return BoolC(not a.value)
    if isinstance(a, Not):
        return a.operand
    return Not(a)


def and_(*items: Term) -> Term:
    out = []
    for i in items:
        if i == TRUE:
            continue
        if i == FALSE:
            return FALSE
        if isinstance(i, And):
            out.extend(i.items)
        else:
            out.append(i)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def or_(*items: Term) -> Term:
    out = []
    for i in items:
        if i == FALSE:
            continue
        if i == TRUE:
            return TRUE
        if isinstance(i, Or):
            out.extend(i.items)
        else:
            out.append(i)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def implies(a: Term, b: Term) -> Term:
    return or_(not_(a), b)


def truth(t: Term) -> Term:
    """Boolean view of a term: bool-sorted symbols become ``b == 1``."""
    return t


# ---------------------------------------------------------------------------
# queries

def sort_of(t: Term) -> str:
    if isinstance(t, Num):
        return "int" if t.value.denominator == 1 else "frac"
    if isinstance(t, (BoolC, Cmp, Not, And, Or)):
        return "bool"
    if isinstance(t, RoleC):
        return "role"
    if isinstance(t, Sym):
        return t.sort
    if isinstance(t, Field):
        return "ref"
    if isinstance(t, Bin):
        if t.op == "/":
            return "frac"
        a, b = sort_of(t.left), sort_of(t.right)
        return "frac" if "frac" in (a, b) else "int"
    if isinstance(t, Neg):
        return sort_of(t.operand)
    if isinstance(t, CutSub):
        return "frac"
    if isinstance(t, Ite):
        a, b = sort_of(t.then), sort_of(t.orelse)
        if a == b:
            return a
        return "frac" if "frac" in (a, b) else a
    raise TypeError(t)


def children(t: Term) -> tuple:
    if isinstance(t, (Bin, CutSub, Cmp)):
        return (t.left, t.right)
    if isinstance(t, (Neg, Not)):
        return (t.operand,)
    if isinstance(t, Ite):
        return (t.cond, t.then, t.orelse)
    if isinstance(t, (And, Or)):
        return t.items
    if isinstance(t, Field):
        return (t.obj,)
    return ()


def symbols(t: Term, acc: dict | None = None) -> dict:
    """All symbols in ``t`` mapped to their sorts."""
    if acc is None:
        acc = {}
    if isinstance(t, Sym):
        acc[t.name] = t.sort
    for c in children(t):
        symbols(c, acc)
    return acc


def has_ite(t: Term) -> bool:
    if isinstance(t, (Ite, CutSub)):
        return True
    return any(has_ite(c) for c in children(t))


def substitute(t: Term, mapping: dict) -> Term:
    """Replace symbols (by name) with terms, re-folding constants."""
    if isinstance(t, Sym):
        return mapping.get(t.name, t)
    if isinstance(t, (Num, BoolC, RoleC)):
        return t
    if isinstance(t, Field):
        return Field(substitute(t.obj, mapping), t.name)
    if isinstance(t, Bin):
        a, b = substitute(t.left, mapping), substitute(t.right, mapping)
        return {"+": add, "-": sub, "*": mul, "/": div}[t.op](a, b)
    if isinstance(t, Neg):
        return neg(substitute(t.operand, mapping))
    if isinstance(t, CutSub):
        return cutsub(substitute(t.left, mapping), substitute(t.right, mapping))
    if isinstance(t, Ite):
        return ite(substitute(t.cond, mapping), substitute(t.then, mapping),
                   substitute(t.orelse, mapping))
    if isinstance(t, Cmp):
        return cmp(t.op, substitute(t.left, mapping), substitute(t.right, mapping))
    if isinstance(t, Not):
        return not_(substitute(t.operand, mapping))
    if isinstance(t, And):
        return and_(*(substitute(i, mapping) for i in t.items))
    if isinstance(t, Or):
        return or_(*(substitute(i, mapping) for i in t.items))
    raise TypeError(t)
