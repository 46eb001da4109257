"""Symbolic execution of method bodies.

Each method is verified in isolation.  Execution carries a list of paths;
every path is a store (``Env``) plus a symbolic heap.  Obligations are keyed
by source location, kind and description so that one obligation reached on
several paths is reported once, failing if any path fails.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, replace

from ..frontend import ast as A
from ..frontend.printer import expr as show_expr, resource as show_resource
from ..frontend.resolve import HANDLE
from ..symheap import solver
from ..symheap import terms as T
from ..symheap.arith import render
from ..symheap.heap import (
    EntailmentFailure, Env, PointsToChunk, SymbolicHeap, UnboundedIteration,
    check_pure, consume, fold, produce, unfold,
)
from ..symheap.translate import EvalError, Translator, sort_for
from .protocol import ProtocolInstance
from .report import MethodReport, Obligation, Report

_DEFAULT_TYPES = {"int": "int", "frac": "frac", "boolean": "bool", "role": "role"}


@dataclass(frozen=True)
class Path:
    env: Env
    heap: SymbolicHeap
    done: bool = False


def _sep(parts) -> A.Resource:
    parts = list(parts)
    if not parts:
        return A.Emp()
    out = parts[0]
    for p in parts[1:]:
        out = A.SepConj(out, p, p.loc)
    return out


def _conjuncts(r) -> list:
    if isinstance(r, A.SepConj):
        return _conjuncts(r.left) + _conjuncts(r.right)
    return [r]


def _text(resources) -> str:
    parts = [show_resource(c) for r in resources for c in _conjuncts(r)]
    return " ** ".join(p[1:-1] if p.startswith("(") and p.endswith(")") and _balanced(p[1:-1]) else p
                       for p in parts) or "true"


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += {"(": 1, ")": -1}.get(ch, 0)
        if depth < 0:
            return False
    return depth == 0


def _loc(node) -> A.Loc:
    return getattr(node, "loc", None) or A.NOLOC


def _assigned(stmts) -> list[tuple[str, str | None]]:
    """Local names assigned anywhere inside ``stmts`` (in first-seen order)."""
    out: list = []

    def add(n):
        if n not in out:
            out.append(n)

    def walk(s):
        if isinstance(s, (A.Assign, A.GhostSet)) and isinstance(s.target, A.Name):
            add(s.target.id)
        elif isinstance(s, A.AtomicOp) and s.target is not None:
            add(s.target)
        elif isinstance(s, A.VarDecl):
            add(s.name)
        elif isinstance(s, A.Block):
            for x in s.stmts:
                walk(x)
        elif isinstance(s, A.If):
            walk(s.then)
            if s.orelse is not None:
                walk(s.orelse)
        elif isinstance(s, A.While):
            walk(s.body)

    for s in stmts:
        walk(s)
    return out


class MethodVerifier:
    def __init__(self, cls: A.ClassDecl, method: A.MethodDecl) -> None:
        self.cls = cls
        self.m = method
        self.ctx = Translator(cls)
        self.obligations: dict[tuple, Obligation] = {}
        self.warnings: list[str] = []

    # -- bookkeeping -----------------------------------------------------------

    def record(self, node, kind: str, description: str, ok: bool,
               detail: str | None = None, transfer: dict | None = None) -> None:
        loc = _loc(node)
        ob = Obligation(loc.line, loc.col, kind, description, ok, detail,
                        [transfer] if transfer else [])
        prev = self.obligations.get(ob.key)
        if prev is None:
            self.obligations[ob.key] = ob
        else:
            prev.merge(ob)

    def warn(self, node, message: str) -> None:
        text = f"{_loc(node)}: {message}"
        if text not in self.warnings:
            self.warnings.append(text)

    def term(self, e, path: Path) -> T.Term:
        return self.ctx.term(e, path.env.values, path.env.types, path.heap)

    def clean(self, t: T.Term, h: SymbolicHeap) -> T.Term:
        if h.inconsistent:
            return t
        return solver.simplify(t, h.pure)

    # -- resource steps with obligations --------------------------------------

    def consume_ob(self, path: Path, r, env: Env, node, kind: str, description: str,
                   transfer: dict | None = None) -> list:
        """Consume ``r``; on failure record it and continue with the heap unchanged."""
        try:
            results = consume(path.heap, r, env, self.ctx)
        except (EntailmentFailure, UnboundedIteration, EvalError) as exc:
            self.record(node, kind, description, False, _why(exc, env), transfer)
            return [(path.heap, env)]
        self.record(node, kind, description, True, None, transfer)
        return results

    def produce_into(self, h: SymbolicHeap, r, env: Env, node) -> list[SymbolicHeap]:
        try:
            out = produce(h, r, env, self.ctx)
        except (EntailmentFailure, UnboundedIteration, EvalError) as exc:
            self.record(node, "precondition", f"produce {show_resource(r)}", False, _why(exc))
            return [h]
        for x in out:
            if x.inconsistent and not h.inconsistent:
                self.warn(node, "symbolic state became inconsistent: "
                          + "; ".join(x.notes or ("unsatisfiable facts",)))
        return out

    # -- entry point -----------------------------------------------------------

    def run(self) -> MethodReport:
        start = time.perf_counter()
        m = self.m
        env = Env()
        h = SymbolicHeap()
        for p in m.params + m.given:
            sym = T.Sym(p.name, sort_for(p.type))
            env = env.bind(p.name, sym, p.type)
            if p.type == "frac" and p in m.given:
                h = h.assume(T.and_(T.cmp(">", sym, T.ZERO), T.cmp("<=", sym, T.ONE)))
        heaps = [h]
        for r in m.requires:
            heaps = [y for x in heaps for y in self.produce_into(x, r, env, r)]
        for x in heaps:
            if x.inconsistent:
                self.warn(m, "precondition is unsatisfiable; the method holds vacuously")
        paths = [Path(env, x) for x in heaps]
        paths = self.block(paths, m.body.stmts)
        post = _sep(m.ensures)
        post_node = m.ensures[0] if m.ensures else m
        desc = _text(m.ensures)
        for p in paths:
            self.consume_ob(p, post, p.env, post_node, "postcondition", desc)
        obligations = sorted(self.obligations.values(), key=lambda o: (o.line, o.col, o.kind, o.description))
        rep = MethodReport(self.cls.name, m.name, _loc(m).line, obligations, list(self.warnings))
        rep.seconds = time.perf_counter() - start
        return rep

    # -- statements ------------------------------------------------------------

    def block(self, paths: list, stmts) -> list:
        for s in stmts:
            nxt = []
            for p in paths:
                if p.done:
                    nxt.append(p)
                else:
                    nxt.extend(self.stmt(p, s))
            paths = nxt
        return paths

    def stmt(self, p: Path, s) -> list:
        try:
            return self._stmt(p, s)
        except EvalError as exc:
            self.record(s, "heap-access", _stmt_text(s), False, str(exc))
            return [p]

    def _stmt(self, p: Path, s) -> list:
        if isinstance(s, A.Block):
            return self.block([p], s.stmts)
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                v = self.clean(self.term(s.init, p), p.heap)
                h = p.heap
            else:
                v, h = p.heap.fresh(s.name, sort_for(s.type))
            return [Path(p.env.bind(s.name, v, s.type), h)]
        if isinstance(s, (A.Assign, A.GhostSet)):
            return self.assign(p, s)
        if isinstance(s, A.AtomicOp):
            return self.atomic(p, s)
        if isinstance(s, A.NewAtomic):
            return self.new_atomic(p, s)
        if isinstance(s, A.MethodCall):
            return self.call(p, s)
        if isinstance(s, A.If):
            return self.if_(p, s)
        if isinstance(s, A.While):
            return self.while_(p, s)
        if isinstance(s, (A.Fold, A.Unfold)):
            kind = "fold" if isinstance(s, A.Fold) else "unfold"
            op = fold if kind == "fold" else unfold
            desc = f"{kind} {show_resource(s.pred)}"
            try:
                heaps = op(p.heap, s.pred, p.env, self.ctx)
            except (EntailmentFailure, UnboundedIteration, EvalError) as exc:
                self.record(s, kind, desc, False, _why(exc))
                return [p]
            self.record(s, kind, desc, True)
            return [Path(p.env, h) for h in heaps]
        if isinstance(s, A.Assert):
            b = self.term(s.expr, p)
            ok = bool(check_pure(p.heap, b))
            self.record(s, "pure-assert", show_expr(s.expr), ok,
                        None if ok else f"cannot prove {render(self.clean(b, p.heap))}")
            return [Path(p.env, p.heap.assume(b))]
        if isinstance(s, A.Return):
            return [replace(p, done=True)]
        raise TypeError(f"unsupported statement {type(s).__name__}")

    def assign(self, p: Path, s) -> list:
        v = self.clean(self.term(s.value, p), p.heap)
        t = s.target
        if isinstance(t, A.Name):
            return [Path(p.env.bind(t.id, v, p.env.types.get(t.id, "int")), p.heap)]
        # field target
        if self.ctx.is_immutable(t.name):
            return [Path(p.env, p.heap.assume(T.cmp("==", self.ctx.field_symbol(t.name), v)))]
        loc = T.Field(self.ctx.receiver(t.obj), t.name)
        chunks = list(p.heap.chunks)
        for i, c in enumerate(chunks):
            if isinstance(c, PointsToChunk) and c.loc == loc and check_pure(p.heap, T.cmp("==", c.perm, T.ONE)):
                chunks[i] = replace(c, value=v)
                self.record(s, "heap-access", f"write {show_expr(t)}", True)
                return [Path(p.env, p.heap.with_chunks(chunks))]
        self.record(s, "heap-access", f"write {show_expr(t)}", False,
                    f"writing {loc} requires permission 1")
        return [p]

    def if_(self, p: Path, s: A.If) -> list:
        c = self.term(s.cond, p)
        h = p.heap
        then_ok = h.inconsistent or not check_pure(h, T.not_(c))
        else_ok = h.inconsistent or not check_pure(h, c)
        if not then_ok and not else_ok:
            self.warn(s, "both branches are infeasible; symbolic state is inconsistent")
            h = h.mark_inconsistent("infeasible conditional")
            then_ok = else_ok = True
        out = []
        if then_ok:
            out += self.block([Path(p.env, h.assume(c))], s.then.stmts)
        if else_ok:
            start = Path(p.env, h.assume(T.not_(c)))
            out += self.block([start], s.orelse.stmts) if s.orelse is not None else [start]
        return out

    def while_(self, p: Path, s: A.While) -> list:
        inv = _sep(s.invariants)
        desc = _text(s.invariants)
        frames = self.consume_ob(p, inv, p.env, s, "loop-invariant-entry", desc)
        modified = [n for n in _assigned(s.body.stmts) if n in p.env.values]
        out = []
        for frame, _ in frames:
            env, h = p.env, frame
            for n in modified:
                typ = env.types.get(n, "int")
                sym, h = h.fresh(n, sort_for(typ))
                env = env.bind(n, sym, typ)
            # body: invariant only, pure facts persist
            body_start = SymbolicHeap((), h.pure, h.counter, h.inconsistent)
            for hb in self.produce_into(body_start, inv, env, s):
                c = self.ctx.term(s.cond, env.values, env.types, hb)
                if not hb.inconsistent and check_pure(hb, T.not_(c)):
                    continue
                body_paths = self.block([Path(env, hb.assume(c))], s.body.stmts)
                for bp in body_paths:
                    if bp.done:
                        out.append(bp)
                        continue
                    self.consume_ob(bp, inv, bp.env, s, "loop-invariant-preservation", desc)
            # exit: frame plus invariant plus negated guard
            for hx in self.produce_into(h, inv, env, s):
                c = self.ctx.term(s.cond, env.values, env.types, hx)
                if not hx.inconsistent and check_pure(hx, c):
                    continue
                out.append(Path(env, hx.assume(T.not_(c))))
        return out

    # -- calls -------------------------------------------------------------------

    def call(self, p: Path, s: A.MethodCall) -> list:
        callee = self.cls.method(s.name)
        env = Env()
        for prm, a in zip(callee.params, s.args):
            env = env.bind(prm.name, self.clean(self.term(a, p), p.heap), prm.type)
        given = dict(s.ghost_args)
        for g in callee.given:
            if g.name not in given:
                self.record(s, "precondition", f"call {s.name}", False, f"missing ghost argument {g.name}")
                return [p]
            env = env.bind(g.name, self.clean(self.term(given[g.name], p), p.heap), g.type)
        pre = _sep(callee.requires)
        desc = f"call {s.name}: " + _text(callee.requires)
        out = []
        for h, _ in self.consume_ob(p, pre, env, s, "precondition", desc):
            heaps = [h]
            for e in callee.ensures:
                heaps = [y for x in heaps for y in self.produce_into(x, e, env, s)]
            out += [Path(p.env, x) for x in heaps]
        return out

    # -- atomic cells --------------------------------------------------------------

    def _ghost(self, p: Path, s, names) -> dict | None:
        given = dict(s.ghost_args)
        out = {}
        for n in names:
            if n not in given:
                self.record(s, "precondition", f"{s.cell}.{getattr(s, 'op', 'new')}", False,
                            f"missing ghost argument {n}")
                return None
            out[n] = self.clean(self.term(given[n], p), p.heap)
        return out

    def _handle(self, proto: ProtocolInstance, name_role: str, name_view: str, name_frac: str):
        cell = A.FieldRef(A.This(), proto.cell)
        return A.PredInstance(cell, HANDLE, (A.Name(name_role), A.Name(name_view), A.Name(name_frac)))

    @staticmethod
    def _inv(proto: ProtocolInstance, name_scale: str):
        return A.PredInstance(A.This(), proto.inv, (A.Name(name_scale),))

    def _side(self, p: Path, s, proto: ProtocolInstance, r, old, new) -> None:
        """Transition legality and state-range obligations of a write."""
        tr = self.clean(proto.trans_term(self.ctx, r, old, new), p.heap)
        ok = bool(check_pure(p.heap, tr))
        self.record(s, "precondition", f"{proto.trans}({render(r)}, {render(old)}, {render(new)})", ok,
                    None if ok else f"illegal transition: cannot prove {render(tr)}")
        rng = proto.range_term(self.ctx, new)
        if rng != T.TRUE:
            ok = bool(check_pure(p.heap, rng))
            self.record(s, "precondition", f"0 <= {render(new)} <= {show_expr(proto.bound)}", ok,
                        None if ok else "new state outside the declared range")

    def atomic(self, p: Path, s: A.AtomicOp) -> list:
        proto = ProtocolInstance.of(self.cls, s.cell)
        if s.op == "get":
            return self.apply_get(p, s, proto)
        if s.op == "set":
            return self.apply_set(p, s, proto)
        return self.apply_cas(p, s, proto)

    def _bind_target(self, env: Env, s: A.AtomicOp, v: T.Term) -> Env:
        if s.target is None:
            return env
        return env.bind(s.target, v, env.types.get(s.target, "int"))

    def apply_get(self, p: Path, s: A.AtomicOp, proto: ProtocolInstance) -> list:
        g = self._ghost(p, s, ("r", "d", "p"))
        if g is None:
            return [p]
        r, d, frac = g["r"], g["d"], g["p"]
        give = self.clean(proto.share_term(self.ctx, r, d), p.heap)
        env = Env({"$r": r, "$d": d, "$p": frac, "$s": give},
                  {"$r": "role", "$d": "int", "$p": "frac", "$s": "frac"})
        pre = A.SepConj(self._handle(proto, "$r", "$d", "$p"), self._inv(proto, "$s"))
        desc = (f"{s.cell}.get: handle({render(r)}, {render(d)}, {render(frac)})"
                f" ** {proto.inv}({render(give)})")
        out = []
        for h, _ in self.consume_ob(p, pre, env, s, "precondition", desc,
                                    {"op": "get", "consumed": f"{proto.inv}({render(give)})"}):
            ret, h = h.fresh(s.target or "ret", "int")
            h = h.assume(proto.range_term(self.ctx, ret))
            take = self.clean(proto.share_term(self.ctx, r, ret), h)
            penv = env.bind("$v", ret, "int").bind("$t", take, "frac")
            post = A.SepConj(self._handle(proto, "$r", "$v", "$p"), self._inv(proto, "$t"))
            for h2 in self.produce_into(h, post, penv, s):
                out.append(Path(self._bind_target(p.env, s, ret), h2))
        return out

    def apply_set(self, p: Path, s: A.AtomicOp, proto: ProtocolInstance) -> list:
        g = self._ghost(p, s, ("r", "d", "p"))
        if g is None:
            return [p]
        r, d, frac = g["r"], g["d"], g["p"]
        v = self.clean(self.term(s.args[0], p), p.heap)
        self._side(p, s, proto, r, d, v)
        to_sync = self.clean(proto.share_term(self.ctx, proto.sync_role, v), p.heap)
        mine = self.clean(proto.share_term(self.ctx, r, d), p.heap)
        env = Env({"$r": r, "$d": d, "$p": frac, "$v": v, "$a": to_sync, "$b": mine},
                  {"$r": "role", "$d": "int", "$p": "frac", "$v": "int", "$a": "frac", "$b": "frac"})
        pre = _sep([self._handle(proto, "$r", "$d", "$p"), self._inv(proto, "$a"), self._inv(proto, "$b")])
        desc = (f"{s.cell}.set({render(v)}): handle({render(r)}, {render(d)}, {render(frac)})"
                f" ** {proto.inv}({render(to_sync)}) ** {proto.inv}({render(mine)})")
        transfer = {"op": "set", "consumed": f"{proto.inv}({render(to_sync)}) ** {proto.inv}({render(mine)})"}
        out = []
        for h, _ in self.consume_ob(p, pre, env, s, "precondition", desc, transfer):
            for h2 in self.produce_into(h, self._handle(proto, "$r", "$v", "$p"), env, s):
                out.append(Path(p.env, h2))
        return out

    def apply_cas(self, p: Path, s: A.AtomicOp, proto: ProtocolInstance) -> list:
        g = self._ghost(p, s, ("r", "p"))
        if g is None:
            return [p]
        r, frac = g["r"], g["p"]
        x = self.clean(self.term(s.args[0], p), p.heap)
        n = self.clean(self.term(s.args[1], p), p.heap)
        self._side(p, s, proto, r, x, n)
        sx = proto.share_term(self.ctx, proto.sync_role, x)
        sn = proto.share_term(self.ctx, proto.sync_role, n)
        give = self.clean(T.cutsub(sn, sx), p.heap)
        take = self.clean(T.cutsub(sx, sn), p.heap)
        env = Env({"$r": r, "$x": x, "$n": n, "$p": frac, "$g": give, "$t": take},
                  {"$r": "role", "$x": "int", "$n": "int", "$p": "frac", "$g": "frac", "$t": "frac"})
        pre = A.SepConj(self._handle(proto, "$r", "$x", "$p"), self._inv(proto, "$g"))
        desc = (f"{s.cell}.compareAndSet({render(x)}, {render(n)}): handle({render(r)}, {render(x)},"
                f" {render(frac)}) ** {proto.inv}({render(give)})")
        transfer = {"op": "compareAndSet",
                    "consumed": f"{proto.inv}({render(give)})",
                    "produced_success": f"{proto.inv}({render(take)})",
                    "produced_failure": f"{proto.inv}({render(give)})"}
        out = []
        for h, _ in self.consume_ob(p, pre, env, s, "precondition", desc, transfer):
            b, h = h.fresh(s.target or "cas", "bool")
            env_out = self._bind_target(p.env, s, b)
            ok = A.SepConj(self._handle(proto, "$r", "$n", "$p"), self._inv(proto, "$t"))
            ko = A.SepConj(self._handle(proto, "$r", "$x", "$p"), self._inv(proto, "$g"))
            for h2 in self.produce_into(h.assume(b), ok, env, s):
                out.append(Path(env_out, h2))
            for h2 in self.produce_into(h.assume(T.not_(b)), ko, env, s):
                out.append(Path(env_out, h2))
        return out

    def new_atomic(self, p: Path, s: A.NewAtomic) -> list:
        proto = ProtocolInstance.of(self.cls, s.cell)
        v = self.clean(self.term(s.arg, p), p.heap)
        rng = proto.range_term(self.ctx, v)
        if rng != T.TRUE:
            ok = bool(check_pure(p.heap, rng))
            self.record(s, "precondition", f"0 <= {render(v)} <= {show_expr(proto.bound)}", ok,
                        None if ok else "initial state outside the declared range")
        give = self.clean(proto.share_term(self.ctx, proto.sync_role, v), p.heap)
        env = Env({"$v": v, "$g": give, "$one": T.ONE}, {"$v": "int", "$g": "frac", "$one": "frac"})
        desc = f"new {s.cell}({render(v)}): {proto.inv}({render(give)})"
        out = []
        for h, _ in self.consume_ob(p, self._inv(proto, "$g"), env, s, "precondition", desc,
                                    {"op": "new", "consumed": f"{proto.inv}({render(give)})"}):
            heaps = [h]
            for role in proto.roles:
                e2 = env.bind("$r", T.RoleC(role), "role")
                handle = self._handle(proto, "$r", "$v", "$one")
                heaps = [y for x in heaps for y in self.produce_into(x, handle, e2, s)]
            out += [Path(p.env, x) for x in heaps]
        return out


def _why(exc: Exception, env: Env | None = None) -> str:
    if isinstance(exc, EntailmentFailure):
        msg = f"{exc.conjunct}: {exc.reason}"
        if exc.candidates:
            msg += " (candidates: " + "; ".join(exc.candidates) + ")"
    else:
        msg = str(exc)
    if env is not None:
        # placeholders bound for atomic-operation contracts
        msg = re.sub(r"\$\w+", lambda m: render(env.values[m.group()]) if m.group() in env.values
                     else m.group(), msg)
    return msg


def _stmt_text(s) -> str:
    return type(s).__name__.lower()


def exec_method(cls: A.ClassDecl, method: A.MethodDecl) -> MethodReport:
    return MethodVerifier(cls, method).run()


def verify_program(program: A.Program, file: str = "<input>") -> Report:
    start = time.perf_counter()
    rep = Report(file)
    for cls in program.classes:
        for m in cls.methods:
            rep.methods.append(exec_method(cls, m))
    rep.seconds = time.perf_counter() - start
    return rep
