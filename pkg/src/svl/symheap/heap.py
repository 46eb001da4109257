"""Symbolic heaps: permission chunks plus pure constraints.

``produce`` adds the chunks and facts denoted by a resource expression;
``consume`` removes them again and returns the residual heap together with
the values bound to ``?x`` patterns.  Both may split into several branches
when a guarded resource has an undecided guard, so both return lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from ..frontend import ast as A
from ..frontend.printer import resource as show_resource
from ..permission import Fraction, frac_cmp
from . import solver
from . import terms as T
from .arith import normalize, render
from .translate import EvalError, Translator, sort_for

BACKTRACK_LIMIT = 32


@dataclass(frozen=True)
class PointsToChunk:
    loc: T.Term
    perm: T.Term
    value: T.Term

    def __str__(self) -> str:
        return f"{self.loc} |-> [{render(self.perm)}] {render(self.value)}"


@dataclass(frozen=True)
class PredChunk:
    recv: T.Term
    name: str
    args: tuple
    scale: T.Term

    def __str__(self) -> str:
        prefix = "" if recv_is_this(self.recv) else f"{self.recv}."
        args = ", ".join(render(a) for a in self.args)
        return f"{prefix}{self.name}({args}) @ {render(self.scale)}"


Chunk = PointsToChunk | PredChunk


def recv_is_this(t: T.Term) -> bool:
    return isinstance(t, T.Sym) and t.name == "this"


@dataclass(frozen=True)
class SymbolicHeap:
    chunks: tuple = ()
    pure: tuple = ()
    counter: int = 0
    inconsistent: bool = False
    notes: tuple = field(default=(), compare=False)

    def fresh(self, hint: str, sort: str) -> tuple[T.Sym, "SymbolicHeap"]:
        return T.Sym(f"{hint}#{self.counter}", sort), replace(self, counter=self.counter + 1)

    def assume(self, fact: T.Term) -> "SymbolicHeap":
        if fact == T.TRUE or fact in self.pure:
            return self
        if fact == T.FALSE:
            return replace(self, pure=self.pure + (fact,), inconsistent=True)
        return replace(self, pure=self.pure + (fact,))

    def with_chunks(self, chunks) -> "SymbolicHeap":
        return replace(self, chunks=tuple(chunks))

    def mark_inconsistent(self, why: str) -> "SymbolicHeap":
        return replace(self, inconsistent=True, notes=self.notes + (why,))

    def read(self, loc: T.Term):
        for c in self.chunks:
            if isinstance(c, PointsToChunk) and c.loc == loc:
                return c.value
        return None

    def render(self) -> str:
        """Stable multi-line rendering used in failure reports."""
        lines = ["chunks:"]
        lines += [f"  {c}" for c in self.chunks] or ["  (emp)"]
        lines.append("pure:")
        lines += [f"  {p}" for p in self.pure] or ["  (none)"]
        if self.inconsistent:
            lines.append("INCONSISTENT")
        return "\n".join(lines)


class EntailmentFailure(Exception):
    def __init__(self, conjunct: str, reason: str, candidates=()) -> None:
        super().__init__(f"{conjunct}: {reason}")
        self.conjunct = conjunct
        self.reason = reason
        self.candidates = tuple(candidates)


class UnboundedIteration(Exception):
    pass


# ---------------------------------------------------------------------------
# pure reasoning on heaps

def check_pure(h: SymbolicHeap, b: T.Term) -> solver.Verdict:
    if h.inconsistent:
        return solver.Verdict.VALID
    return solver.check(h.pure, b)


def _equal(h: SymbolicHeap, a: T.Term, b: T.Term) -> bool:
    if a == b:
        return True
    if isinstance(a, T.Field) or isinstance(b, T.Field):
        return False
    return bool(check_pure(h, T.cmp("==", a, b)))


def _const_frac(t: T.Term):
    if isinstance(t, T.Num) and 0 <= t.value <= 1:
        return Fraction(t.value.numerator, t.value.denominator)
    return None


def _is_zero(h: SymbolicHeap, t: T.Term) -> bool:
    if isinstance(t, T.Num):
        return t.value == 0
    return bool(check_pure(h, T.cmp("==", t, T.ZERO)))


def _geq(h: SymbolicHeap, a: T.Term, b: T.Term) -> bool:
    fa, fb = _const_frac(a), _const_frac(b)
    if fa is not None and fb is not None:
        return frac_cmp(fa, fb) >= 0
    return a == b or bool(check_pure(h, T.cmp(">=", a, b)))


def _clean(h: SymbolicHeap, t: T.Term) -> T.Term:
    """Canonical form of a scale or permission term under the heap's facts."""
    if isinstance(t, T.Num):
        return t
    if T.has_ite(t) and not h.inconsistent:
        return solver.simplify(t, h.pure)
    return normalize(t)


def consistent(h: SymbolicHeap) -> SymbolicHeap:
    """Mark ``h`` inconsistent when its pure part has no model."""
    if not h.inconsistent and solver.unsat(h.pure):
        return h.mark_inconsistent("pure constraints are unsatisfiable")
    return h


# ---------------------------------------------------------------------------
# evaluation helpers

class Env:
    """Names visible to a resource expression together with their types."""

    def __init__(self, values: dict | None = None, types: dict | None = None) -> None:
        self.values = dict(values or {})
        self.types = dict(types or {})

    def bind(self, name: str, value: T.Term, type_: str) -> "Env":
        e = Env(self.values, self.types)
        e.values[name] = value
        e.types[name] = type_
        return e


def _term(ctx: Translator, e, env: Env, h: SymbolicHeap, what: str) -> T.Term:
    try:
        return ctx.term(e, env.values, env.types, h)
    except EvalError as exc:
        raise EntailmentFailure(what, str(exc)) from None


def _instance(ctx: Translator, r: A.PredInstance, env: Env, h: SymbolicHeap):
    """(decl, receiver, argument terms or Binders, scale term) for ``r``."""
    decl = ctx.pred(r.name)
    what = show_resource(r)
    if len(r.args) != len(decl.params):
        raise EntailmentFailure(what, f"{r.name} expects {len(decl.params)} arguments")
    recv = ctx.receiver(r.recv)
    args = []
    for a, p in zip(r.args, decl.params):
        if isinstance(a, A.Binder) and a.name not in env.values:
            args.append(a)
        elif isinstance(a, A.Binder):
            args.append(env.values[a.name])
        else:
            args.append(_term(ctx, a, env, h, what))
    if decl.scaled:
        scale = args[-1]
        if isinstance(scale, A.Binder):
            raise EntailmentFailure(what, "a scale cannot be a pattern")
        return decl, recv, args[:-1], _clean(h, scale)
    return decl, recv, args, T.ONE


def _iter_values(ctx: Translator, r: A.IterStar, env: Env, h: SymbolicHeap) -> list[int]:
    """Concrete values of the bound variable of an iterated star."""
    lo = hi = None
    for c in _conjuncts(r.range):
        if not isinstance(c, A.Binary):
            continue
        op, left, right = c.op, c.left, c.right
        if isinstance(right, A.Name) and right.id == r.var:
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}.get(op, op)
            left, right = right, left
        if not (isinstance(left, A.Name) and left.id == r.var):
            continue
        try:
            bound = _const_value(h, ctx.term(right, env.values, env.types, h))
        except EvalError:
            bound = None
        if bound is None:
            continue
        if op == ">=":
            lo = bound if lo is None else max(lo, bound)
        elif op == ">":
            lo = bound + 1 if lo is None else max(lo, bound + 1)
        elif op == "<=":
            hi = bound if hi is None else min(hi, bound)
        elif op == "<":
            hi = bound - 1 if hi is None else min(hi, bound - 1)
    if lo is None or hi is None:
        raise UnboundedIteration(f"cannot bound the range of {r.var}")
    out = []
    for i in range(lo, hi + 1):
        cond = ctx.term(r.range, env.values | {r.var: T.num(i)}, env.types | {r.var: "int"}, h)
        if check_pure(h, cond):
            out.append(i)
        elif not check_pure(h, T.not_(cond)):
            raise UnboundedIteration(f"cannot decide the range of {r.var} at {i}")
    return out


def _conjuncts(e) -> list:
    if isinstance(e, A.Binary) and e.op == "&&":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _const_value(h: SymbolicHeap, t: T.Term):
    t = solver.simplify(t, h.pure) if not h.inconsistent else t
    if isinstance(t, T.Num) and t.value.denominator == 1:
        return int(t.value)
    for p in h.pure:
        if isinstance(p, T.Cmp) and p.op == "==" and p.left == t and isinstance(p.right, T.Num):
            return int(p.right.value)
        if isinstance(p, T.Cmp) and p.op == "==" and p.right == t and isinstance(p.left, T.Num):
            return int(p.left.value)
    return None


# ---------------------------------------------------------------------------
# produce

def add_pred(h: SymbolicHeap, chunk: PredChunk) -> SymbolicHeap:
    scale = _clean(h, chunk.scale)
    if _is_zero(h, scale):
        return h
    chunks = list(h.chunks)
    for i, c in enumerate(chunks):
        if (isinstance(c, PredChunk) and c.name == chunk.name and c.recv == chunk.recv
                and len(c.args) == len(chunk.args)
                and all(_equal(h, a, b) for a, b in zip(c.args, chunk.args))):
            chunks[i] = replace(c, scale=_clean(h, T.add(c.scale, scale)))
            return h.with_chunks(chunks)
    chunks.append(replace(chunk, scale=scale))
    return h.with_chunks(chunks)


def add_points_to(h: SymbolicHeap, chunk: PointsToChunk) -> SymbolicHeap:
    perm = _clean(h, chunk.perm)
    if _is_zero(h, perm):
        return h
    chunks = list(h.chunks)
    for i, c in enumerate(chunks):
        if isinstance(c, PointsToChunk) and c.loc == chunk.loc:
            total = _clean(h, T.add(c.perm, perm))
            h2 = h.assume(T.cmp("==", c.value, chunk.value))
            chunks[i] = replace(c, perm=total)
            h2 = h2.with_chunks(chunks)
            over = total.value > 1 if isinstance(total, T.Num) else check_pure(h2, T.cmp(">", total, T.ONE))
            if over:
                h2 = h2.mark_inconsistent(f"permission to {c.loc} exceeds 1")
            return h2
    chunks.append(replace(chunk, perm=perm))
    return h.with_chunks(chunks)


def produce(h: SymbolicHeap, r, env: Env, ctx: Translator) -> list[SymbolicHeap]:
    """Add ``r`` to ``h``; returns one heap per case of undecided guards."""
    return [consistent(x) for x in _prod(h, r, env, ctx)]


def _prod(h: SymbolicHeap, r, env: Env, ctx: Translator) -> list[SymbolicHeap]:
    if isinstance(r, A.Emp):
        return [h]
    if isinstance(r, A.Pure):
        return [h.assume(_term(ctx, r.expr, env, h, show_resource(r)))]
    if isinstance(r, A.SepConj):
        out = []
        for h1 in _prod(h, r.left, env, ctx):
            out.extend(_prod(h1, r.right, env, ctx))
        return out
    if isinstance(r, A.Implies):
        c = _term(ctx, r.cond, env, h, show_resource(r))
        d = None if h.inconsistent else solver.decide(h.pure, c)
        if d is True:
            return _prod(h, r.body, env, ctx)
        if d is False:
            return [h]
        return _prod(h.assume(c), r.body, env, ctx) + [h.assume(T.not_(c))]
    if isinstance(r, A.IterStar):
        hs = [h]
        for i in _iter_values(ctx, r, env, h):
            inner = env.bind(r.var, T.num(i), "int")
            hs = [y for x in hs for y in _prod(x, r.body, inner, ctx)]
        return hs
    if isinstance(r, A.PointsTo):
        what = show_resource(r)
        loc = ctx.receiver(r.target)
        perm = _term(ctx, r.perm, env, h, what)
        if r.value is None or (isinstance(r.value, A.Binder) and r.value.name not in env.values):
            value, h = h.fresh(r.value.name if isinstance(r.value, A.Binder) else "v", "int")
        elif isinstance(r.value, A.Binder):
            value = env.values[r.value.name]
        else:
            value = _term(ctx, r.value, env, h, what)
        return [add_points_to(h, PointsToChunk(loc, perm, value))]
    if isinstance(r, A.PredInstance):
        decl, recv, args, scale = _instance(ctx, r, env, h)
        vals = []
        for a, p in zip(args, decl.params):
            if isinstance(a, A.Binder):
                s, h = h.fresh(a.name, sort_for(p.type))
                vals.append(s)
            else:
                vals.append(a)
        return [add_pred(h, PredChunk(recv, decl.name, tuple(vals), scale))]
    raise TypeError(f"cannot produce {type(r).__name__}")


# ---------------------------------------------------------------------------
# consume

Result = list  # of (SymbolicHeap, Env)


class _Budget:
    def __init__(self) -> None:
        self.left = BACKTRACK_LIMIT


def consume(h: SymbolicHeap, r, env: Env, ctx: Translator) -> Result:
    """Remove ``r`` from ``h``; returns ``(residual, env with ?x bindings)`` per branch."""
    return _cons(h, r, env, ctx, lambda h2, e2: [(h2, e2)], _Budget())


def _cons(h, r, env: Env, ctx, k: Callable, budget: _Budget) -> Result:
    if isinstance(r, A.Emp):
        return k(h, env)
    if isinstance(r, A.Pure):
        what = show_resource(r)
        t = _term(ctx, r.expr, env, h, what)
        if check_pure(h, t):
            return k(h, env)
        raise EntailmentFailure(what, f"cannot prove {solver.simplify(t, h.pure) if not h.inconsistent else t}")
    if isinstance(r, A.SepConj):
        return _cons(h, r.left, env, ctx,
                     lambda h1, e1: _cons(h1, r.right, e1, ctx, k, budget), budget)
    if isinstance(r, A.Implies):
        c = _term(ctx, r.cond, env, h, show_resource(r))
        d = True if h.inconsistent else solver.decide(h.pure, c)
        if d is True:
            return _cons(h, r.body, env, ctx, k, budget)
        if d is False:
            return k(h, env)
        return (_cons(h.assume(c), r.body, env, ctx, k, budget)
                + k(h.assume(T.not_(c)), env))
    if isinstance(r, A.IterStar):
        values = _iter_values(ctx, r, env, h)

        def step(i: int, hh, ee):
            if i == len(values):
                return k(hh, ee)
            inner = ee.bind(r.var, T.num(values[i]), "int")
            return _cons(hh, r.body, inner, ctx,
                         lambda h2, e2: step(i + 1, h2, _unbind(e2, r.var, ee)), budget)

        return step(0, h, env)
    if isinstance(r, A.PointsTo):
        return _cons_points_to(h, r, env, ctx, k, budget)
    if isinstance(r, A.PredInstance):
        return _cons_pred(h, r, env, ctx, k, budget)
    raise TypeError(f"cannot consume {type(r).__name__}")


def _unbind(e: Env, var: str, outer: Env) -> Env:
    out = Env(e.values, e.types)
    if var in outer.values:
        out.values[var], out.types[var] = outer.values[var], outer.types[var]
    else:
        out.values.pop(var, None)
        out.types.pop(var, None)
    return out


def _bind_pattern(h, env: Env, pattern, value, type_: str):
    """Match one argument; returns the extended env or None."""
    if isinstance(pattern, A.Binder):
        return env.bind(pattern.name, value, type_)
    return env if (h.inconsistent or _equal(h, pattern, value)) else None


def _cons_pred(h, r: A.PredInstance, env: Env, ctx, k, budget) -> Result:
    what = show_resource(r)
    decl, recv, args, need = _instance(ctx, r, env, h)
    if _is_zero(h, need) and not any(isinstance(a, A.Binder) for a in args):
        return k(h, env)
    if h.inconsistent:
        e = env
        for a, p in zip(args, decl.params):
            if isinstance(a, A.Binder):
                s, h = h.fresh(a.name, sort_for(p.type))
                e = e.bind(a.name, s, p.type)
        return k(h, e)
    considered = []
    first_failure = None
    for idx, c in enumerate(h.chunks):
        if not (isinstance(c, PredChunk) and c.name == decl.name and c.recv == recv):
            continue
        considered.append(str(c))
        e = env
        for a, v, p in zip(args, c.args, decl.params):
            e = _bind_pattern(h, e, a, v, p.type) if e is not None else None
        if e is None or not _geq(h, c.scale, need):
            continue
        rest = _clean(h, T.sub(c.scale, need))
        chunks = list(h.chunks)
        if _is_zero(h, rest):
            del chunks[idx]
        else:
            chunks[idx] = replace(c, scale=rest)
        try:
            return k(h.with_chunks(chunks), e)
        except EntailmentFailure as exc:
            if first_failure is None:
                first_failure = exc
            budget.left -= 1
            if budget.left < 0:
                raise EntailmentFailure(what, "backtracking bound exceeded", considered) from None
    if first_failure is not None:
        raise first_failure
    shown = ", ".join(render(a) if not isinstance(a, A.Binder) else f"?{a.name}" for a in args)
    raise EntailmentFailure(
        what, f"no chunk provides {decl.name}({shown}) at {render(need)}", considered)


def _cons_points_to(h, r: A.PointsTo, env: Env, ctx, k, budget) -> Result:
    what = show_resource(r)
    loc = ctx.receiver(r.target)
    need = _clean(h, _term(ctx, r.perm, env, h, what))
    if not check_pure(h, T.and_(T.cmp(">=", need, T.ZERO), T.cmp("<=", need, T.ONE))):
        raise EntailmentFailure(what, f"permission {render(need)} is not within [0, 1]")
    binder = isinstance(r.value, A.Binder) and r.value.name not in env.values
    if _is_zero(h, need) and not binder:
        return k(h, env)
    if h.inconsistent:
        if binder:
            s, h = h.fresh(r.value.name, "int")
            env = env.bind(r.value.name, s, "int")
        return k(h, env)
    considered = []
    for idx, c in enumerate(h.chunks):
        if not (isinstance(c, PointsToChunk) and c.loc == loc):
            continue
        considered.append(str(c))
        if not _geq(h, c.perm, need):
            continue
        e = env
        if r.value is not None:
            if binder:
                e = env.bind(r.value.name, c.value, "int")
            else:
                v = env.values[r.value.name] if isinstance(r.value, A.Binder) else _term(ctx, r.value, env, h, what)
                if not _equal(h, v, c.value):
                    raise EntailmentFailure(what, f"value {render(c.value)} does not match {render(v)}",
                                            considered)
        rest = _clean(h, T.sub(c.perm, need))
        chunks = list(h.chunks)
        if _is_zero(h, rest):
            del chunks[idx]
        else:
            chunks[idx] = replace(c, perm=rest)
        return k(h.with_chunks(chunks), e)
    raise EntailmentFailure(what, f"insufficient permission to {loc}: need {render(need)}", considered)


# ---------------------------------------------------------------------------
# fold / unfold

def _body_env(decl: A.PredicateDecl, args: list, scale: T.Term) -> Env:
    vals = list(args) + ([scale] if decl.scaled else [])
    return Env({p.name: v for p, v in zip(decl.params, vals)},
               {p.name: p.type for p in decl.params})


def fold(h: SymbolicHeap, r: A.PredInstance, env: Env, ctx: Translator) -> list[SymbolicHeap]:
    decl, recv, args, scale = _instance(ctx, r, env, h)
    what = show_resource(r)
    if decl.body is None:
        raise EntailmentFailure(what, f"{decl.name} is abstract and cannot be folded")
    if any(isinstance(a, A.Binder) for a in args):
        raise EntailmentFailure(what, "patterns are not allowed here")
    if _is_zero(h, scale):
        return [h]
    out = []
    for h2, _ in consume(h, decl.body, _body_env(decl, args, scale), ctx):
        out.append(add_pred(h2, PredChunk(recv, decl.name, tuple(args), scale)))
    return out


def unfold(h: SymbolicHeap, r: A.PredInstance, env: Env, ctx: Translator) -> list[SymbolicHeap]:
    decl, recv, args, scale = _instance(ctx, r, env, h)
    what = show_resource(r)
    if decl.body is None:
        raise EntailmentFailure(what, f"{decl.name} is abstract and cannot be unfolded")
    if _is_zero(h, scale):
        return [h]
    out = []
    for h2, _ in consume(h, r, env, ctx):
        out.extend(produce(h2, decl.body, _body_env(decl, args, scale), ctx))
    return out
