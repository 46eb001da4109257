"""Validity checking for the pure fragment.

A goal is valid under hypotheses when ``hyps && !goal`` has no model.  The
conjunction is brought into disjunctive normal form with every if-then-else
(and truncated subtraction) lifted into a case split, each cube is reduced
to linear constraints over rationals and integers, and Fourier-Motzkin
elimination with integer tightening looks for a contradiction.  Cubes with
non-linear monomials get a second chance by enumerating small integer
ranges.  Anything the procedure cannot refute counts as satisfiable, so
``NotValid`` may reflect incompleteness but ``Valid`` never lies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction as Q
from math import floor, gcd, lcm

from . import terms as T
from .arith import NonArithmetic, Poly, RatFn, to_ratfn

MAX_CUBES = 4096
MAX_CONSTRAINTS = 4000
MAX_ENUM = 16


class Verdict(Enum):
    VALID = "valid"
    NOT_VALID = "not-valid"

    def __bool__(self) -> bool:
        return self is Verdict.VALID


def role_code(name: str) -> int:
    return int.from_bytes(name.encode(), "big")


# ---------------------------------------------------------------------------
# literals and DNF

@dataclass(frozen=True)
class Lit:
    """``expr op 0`` with op one of ``== != < <=``."""

    op: str
    expr: RatFn


_NEG = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


class _Ctx:
    def __init__(self) -> None:
        self.sorts: dict[str, str] = {}


def _lift(t: T.Term, ctx: _Ctx) -> list:
    """Case split ``t`` into ``(conditions, ite-free term)`` pairs."""
    if isinstance(t, T.Num):
        return [((), t)]
    if isinstance(t, T.Sym):
        ctx.sorts[t.name] = t.sort
        return [((), t)]
    if isinstance(t, T.RoleC):
        return [((), T.num(role_code(t.name)))]
    if isinstance(t, T.BoolC):
        return [((), T.ONE if t.value else T.ZERO)]
    if isinstance(t, T.Field):
        name = f"@{t}"
        ctx.sorts[name] = "ref"
        return [((), T.Sym(name, "ref"))]
    if isinstance(t, T.Ite):
        out = [((t.cond,) + c, v) for c, v in _lift(t.then, ctx)]
        out += [((T.not_(t.cond),) + c, v) for c, v in _lift(t.orelse, ctx)]
        return out
    if isinstance(t, T.CutSub):
        return _lift(T.Ite(T.Cmp(">=", t.left, t.right), T.Bin("-", t.left, t.right), T.ZERO), ctx)
    if isinstance(t, T.Bin):
        return [(ca + cb, T.Bin(t.op, a, b))
                for (ca, a), (cb, b) in itertools.product(_lift(t.left, ctx), _lift(t.right, ctx))]
    if isinstance(t, T.Neg):
        return [(c, T.Neg(v)) for c, v in _lift(t.operand, ctx)]
    if isinstance(t, (T.Cmp, T.Not, T.And, T.Or)):
        # boolean used as a number
        return [((t,), T.ONE), ((T.not_(t),), T.ZERO)]
    raise TypeError(t)


def _atom(op: str, a: T.Term, b: T.Term) -> list:
    """Literal list for an ite-free comparison (empty list = no information)."""
    try:
        d = to_ratfn(a) - to_ratfn(b)
    except (NonArithmetic, ZeroDivisionError):
        return []
    if op == ">":
        return [Lit("<", -d)]
    if op == ">=":
        return [Lit("<=", -d)]
    return [Lit(op, d)]


def _dnf(f: T.Term, ctx: _Ctx, positive: bool = True) -> list:
    """List of cubes; each cube is a tuple of Lit."""
    if isinstance(f, T.BoolC):
        return [()] if f.value == positive else []
    if isinstance(f, T.Not):
        return _dnf(f.operand, ctx, not positive)
    if isinstance(f, (T.And, T.Or)):
        conj = isinstance(f, T.And) == positive
        parts = [_dnf(i, ctx, positive) for i in f.items]
        if not conj:
            return [c for p in parts for c in p]
        out: list = [()]
        for p in parts:
            out = [a + b for a in out for b in p]
            if len(out) > MAX_CUBES:
                raise _TooBig
        return out
    if isinstance(f, T.Cmp):
        op = f.op if positive else _NEG[f.op]
        out = []
        for (ca, a), (cb, b) in itertools.product(_lift(f.left, ctx), _lift(f.right, ctx)):
            lits = tuple(_atom(op, a, b))
            conds = ca + cb
            if conds:
                for cube in _dnf(T.and_(*conds), ctx, True):
                    out.append(cube + lits)
            else:
                out.append(lits)
        return out
    if isinstance(f, T.Sym) and f.sort == "bool":
        ctx.sorts[f.name] = "bool"
        return [(Lit("==", RatFn(Poly.var(f.name) - Poly.const(1 if positive else 0))),)]
    if isinstance(f, T.Ite):
        return _dnf(T.or_(T.and_(f.cond, f.then), T.and_(T.not_(f.cond), f.orelse)), ctx, positive)
    # anything else carries no usable information
    return [()]


class _TooBig(Exception):
    pass


# ---------------------------------------------------------------------------
# linear reasoning

@dataclass(frozen=True)
class _Con:
    """``sum(coeffs) + const`` compared with 0: ``<`` if strict else ``<=``."""

    coeffs: tuple  # sorted (var, Q)
    const: Q
    strict: bool


class _Linear:
    def __init__(self, sorts: dict):
        self.sorts = sorts

    def is_int(self, var: str) -> bool:
        return all(self.sorts.get(v, "int") in ("int", "bool", "role") for v in var.split("*"))

    def linearize(self, p: Poly) -> tuple[dict, Q]:
        coeffs: dict[str, Q] = {}
        const = Q(0)
        for m, c in p.terms.items():
            if m == ():
                const += c
            else:
                name = "*".join(v if e == 1 else "*".join([v] * e) for v, e in m)
                coeffs[name] = coeffs.get(name, Q(0)) + c
        return coeffs, const

    def make(self, coeffs: dict, const: Q, strict: bool):
        coeffs = {v: c for v, c in coeffs.items() if c != 0}
        if coeffs and all(self.is_int(v) for v in coeffs):
            m = lcm(*(c.denominator for c in coeffs.values()))
            ints = [int(c * m) for c in coeffs.values()]
            g = gcd(*ints)
            scale = Q(m, g)
            coeffs = {v: c * scale for v, c in coeffs.items()}
            const = const * scale
            # sum + const <= 0 with integral sum: sum <= floor(-const)
            bound = -const
            if strict:
                bound = Q(floor(bound)) if bound.denominator != 1 else bound - 1
            else:
                bound = Q(floor(bound))
            const, strict = -bound, False
        return _Con(tuple(sorted(coeffs.items())), const, strict)

    @staticmethod
    def trivially_false(c: _Con) -> bool:
        if c.coeffs:
            return False
        return c.const > 0 or (c.strict and c.const >= 0)

    def unsat(self, eqs: list, ineqs: list) -> bool:
        """Decide (incompletely) whether the conjunction has no model."""
        eqs = [dict(e) for e in eqs]
        consts = [e.pop(None) for e in eqs]
        ineq_list = [(dict(c), k, s) for c, k, s in ineqs]
        # equality elimination by substitution
        while eqs:
            e, k = eqs.pop(), consts.pop()
            e = {v: c for v, c in e.items() if c != 0}
            if not e:
                if k != 0:
                    return True
                continue
            if all(self.is_int(v) for v in e):
                m = lcm(*(c.denominator for c in e.values()), k.denominator)
                g = gcd(*(int(c * m) for c in e.values()))
                if (k * m) % g != 0:
                    return True
            var = min(e, key=lambda v: (abs(e[v]) != 1, v))
            a = e[var]
            # var = -(rest + k)/a
            rest = {v: -c / a for v, c in e.items() if v != var}
            rk = -k / a

            def subst(coeffs: dict, const: Q):
                if var not in coeffs:
                    return coeffs, const
                cv = coeffs.pop(var)
                out = dict(coeffs)
                for v, c in rest.items():
                    out[v] = out.get(v, Q(0)) + cv * c
                return out, const + cv * rk

            for i in range(len(eqs)):
                eqs[i], consts[i] = subst(dict(eqs[i]), consts[i])
            ineq_list = [(*subst(dict(c), k2), s) for c, k2, s in ineq_list]
        cons = set()
        for c, k, s in ineq_list:
            con = self.make(c, k, s)
            if self.trivially_false(con):
                return True
            if con.coeffs:
                cons.add(con)
        return self._fm(cons)

    def _fm(self, cons: set) -> bool:
        while cons:
            if len(cons) > MAX_CONSTRAINTS:
                return False
            occ: dict[str, list[int]] = {}
            for c in cons:
                for v, a in c.coeffs:
                    occ.setdefault(v, [0, 0])[0 if a > 0 else 1] += 1
            var = min(occ, key=lambda v: (occ[v][0] * occ[v][1] - occ[v][0] - occ[v][1], v))
            pos = [c for c in cons if dict(c.coeffs).get(var, 0) > 0]
            neg = [c for c in cons if dict(c.coeffs).get(var, 0) < 0]
            rest = {c for c in cons if dict(c.coeffs).get(var, 0) == 0}
            for p in pos:
                pc = dict(p.coeffs)
                for n in neg:
                    nc = dict(n.coeffs)
                    a, b = pc[var], -nc[var]
                    coeffs: dict[str, Q] = {}
                    for v, c in pc.items():
                        coeffs[v] = coeffs.get(v, Q(0)) + c * b
                    for v, c in nc.items():
                        coeffs[v] = coeffs.get(v, Q(0)) + c * a
                    coeffs.pop(var, None)
                    con = self.make(coeffs, p.const * b + n.const * a, p.strict or n.strict)
                    if self.trivially_false(con):
                        return True
                    if con.coeffs:
                        rest.add(con)
            cons = rest
        return False


def _cube_unsat(cube: tuple, sorts: dict, depth: int = 0) -> bool:
    lin = _Linear(sorts)
    polys: list[Lit] = []
    for lit in cube:
        if lit.expr.is_poly():
            polys.append(lit)
            continue
        n, d = lit.expr.num, lit.expr.den
        if _poly_unsat(polys + [Lit("<=", RatFn(d))], lin):
            polys.append(Lit(lit.op, RatFn(n)))            # d > 0
        elif _poly_unsat(polys + [Lit("<=", RatFn(-d))], lin):
            op = {"<": ">", "<=": ">="}.get(lit.op, lit.op)  # d < 0 flips
            polys.extend(_atom_poly(op, n))
        else:
            if depth > 3:
                continue
            # split on the denominator sign; x/0 is taken to be 0
            rest = tuple(x for x in cube if x is not lit)
            op_neg = {"<": ">", "<=": ">="}.get(lit.op, lit.op)
            cases = [
                rest + (Lit("<", RatFn(-d)), Lit(lit.op, RatFn(n))),
                rest + (Lit("<", RatFn(d)),) + tuple(_atom_poly(op_neg, n)),
                rest + (Lit("==", RatFn(d)), Lit(lit.op, RatFn(Poly()))),
            ]
            return all(_cube_unsat(c, sorts, depth + 1) for c in cases)
    return _poly_unsat(polys, lin)


def _atom_poly(op: str, n: Poly) -> list:
    if op == ">":
        return [Lit("<", RatFn(-n))]
    if op == ">=":
        return [Lit("<=", RatFn(-n))]
    return [Lit(op, RatFn(n))]


def _poly_unsat(lits: list, lin: _Linear) -> bool:
    eqs, ineqs, diseqs = [], [], []
    bools = set()
    for lit in lits:
        p = lit.expr.num
        coeffs, const = lin.linearize(p)
        for v in coeffs:
            for part in v.split("*"):
                if lin.sorts.get(part) == "bool":
                    bools.add(part)
        if lit.op == "==":
            e = dict(coeffs)
            e[None] = const
            eqs.append(e)
        elif lit.op == "<":
            ineqs.append((coeffs, const, True))
        elif lit.op == "<=":
            ineqs.append((coeffs, const, False))
        else:
            diseqs.append((coeffs, const))
    for b in sorted(bools):
        ineqs.append(({b: Q(-1)}, Q(0), False))
        ineqs.append(({b: Q(1)}, Q(-1), False))
    if lin.unsat(eqs, ineqs):
        return True
    if diseqs and len(diseqs) <= 6:
        for choice in itertools.product((True, False), repeat=len(diseqs)):
            extra = []
            for (c, k), lt in zip(diseqs, choice):
                if lt:
                    extra.append((c, k, True))
                else:
                    extra.append(({v: -a for v, a in c.items()}, -k, True))
            if not lin.unsat(eqs, ineqs + extra):
                return _enum_unsat(lits, lin)
        return True
    return _enum_unsat(lits, lin)


def _enum_unsat(lits: list, lin: _Linear) -> bool:
    """Retry cubes with non-linear monomials by enumerating bounded int variables."""
    nonlinear = set()
    for lit in lits:
        for m in lit.expr.num.terms:
            if len(m) > 1 or any(e > 1 for _, e in m):
                nonlinear.update(v for v, _ in m)
    candidates = sorted(v for v in nonlinear if lin.sorts.get(v, "int") == "int")
    for var in candidates:
        lo, hi = _bounds(lits, var)
        if lo is None or hi is None or hi - lo + 1 > MAX_ENUM:
            continue
        for val in range(lo, hi + 1):
            sub = [Lit(l.op, RatFn(l.expr.num.substitute(var, Q(val)))) for l in lits]
            if not _poly_unsat(sub, lin):
                return False
        return True
    return False


def _bounds(lits: list, var: str):
    lo = hi = None
    key = ((var, 1),)
    for lit in lits:
        p = lit.expr.num
        if set(p.terms) - {key, ()} or key not in p.terms:
            continue
        a, k = p.terms[key], p.const_value()
        val = -k / a  # a*var + k op 0
        if lit.op == "==":
            if val.denominator == 1:
                lo = hi = int(val)
            continue
        strict = lit.op == "<"
        if lit.op not in ("<", "<="):
            continue
        if a > 0:  # var <= val
            b = floor(val) if not (strict and val.denominator == 1) else int(val) - 1
            hi = b if hi is None else min(hi, b)
        else:  # var >= val
            c = -floor(-val) if not (strict and val.denominator == 1) else int(val) + 1
            lo = c if lo is None else max(lo, c)
    return lo, hi


# ---------------------------------------------------------------------------
# entry points

_CACHE: dict = {}


def _relevant(hyps: tuple, goal: T.Term) -> tuple:
    want = set(T.symbols(goal))
    if not want:
        return hyps
    pool = [(h, set(T.symbols(h))) for h in hyps]
    keep = [False] * len(pool)
    changed = True
    while changed:
        changed = False
        for i, (h, vs) in enumerate(pool):
            if not keep[i] and (not vs or vs & want):
                keep[i] = True
                want |= vs
                changed = True
    return tuple(h for (h, _), k in zip(pool, keep) if k)


def unsat(formulas) -> bool:
    """True when the conjunction of ``formulas`` provably has no model."""
    ctx = _Ctx()
    try:
        cubes: list = [()]
        for f in formulas:
            alts = _dnf(f, ctx)
            nxt = [c + a for c in cubes for a in alts]
            if len(alts) > 1:
                nxt = [c for c in nxt if not _cube_unsat(c, ctx.sorts)]
            cubes = nxt
            if not cubes:
                return True
            if len(cubes) > MAX_CUBES:
                return False
        return all(_cube_unsat(c, ctx.sorts) for c in cubes)
    except _TooBig:
        return False


def check(hyps, goal: T.Term) -> Verdict:
    """Is ``goal`` implied by ``hyps``?"""
    if goal == T.TRUE:
        return Verdict.VALID
    hyps = tuple(hyps)
    if goal in hyps:
        return Verdict.VALID
    key = (hyps, goal)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    rel = _relevant(hyps, goal)
    res = Verdict.VALID if unsat(rel + (T.not_(goal),)) else Verdict.NOT_VALID
    if len(_CACHE) > 200_000:
        _CACHE.clear()
    _CACHE[key] = res
    return res


def decide(hyps, b: T.Term):
    """``True``/``False`` when ``b`` is settled by ``hyps``; ``None`` otherwise."""
    if check(hyps, b):
        return True
    if check(hyps, T.not_(b)):
        return False
    return None


def simplify(t: T.Term, hyps) -> T.Term:
    """Resolve conditionals whose guard is settled by ``hyps``; normalise arithmetic."""
    from .arith import normalize

    hyps = tuple(hyps)

    def go(x: T.Term) -> T.Term:
        if isinstance(x, T.Ite):
            d = decide(hyps, x.cond)
            if d is True:
                return go(x.then)
            if d is False:
                return go(x.orelse)
            return T.ite(go(x.cond), go(x.then), go(x.orelse))
        if isinstance(x, T.CutSub):
            a, b = go(x.left), go(x.right)
            d = decide(hyps, T.cmp(">=", a, b))
            if d is True:
                return normalize(T.sub(a, b))
            if d is False:
                return T.ZERO
            return T.cutsub(a, b)
        if isinstance(x, T.Bin):
            return normalize({"+": T.add, "-": T.sub, "*": T.mul, "/": T.div}[x.op](go(x.left), go(x.right)))
        if isinstance(x, T.Neg):
            return normalize(T.neg(go(x.operand)))
        if isinstance(x, T.Cmp):
            return T.cmp(x.op, go(x.left), go(x.right))
        if isinstance(x, T.Not):
            return T.not_(go(x.operand))
        if isinstance(x, T.And):
            return T.and_(*(go(i) for i in x.items))
        if isinstance(x, T.Or):
            return T.or_(*(go(i) for i in x.items))
        return x

    out = go(t)
    if T.sort_of(out) in ("int", "frac") and not isinstance(out, (T.Num, T.Sym)):
        # a constant under the hypotheses?
        from .arith import to_ratfn as _r
        try:
            r = _r(out)
            if r.is_const():
                return T.Num(r.num.const_value())
        except (NonArithmetic, ZeroDivisionError):
            pass
    return out
