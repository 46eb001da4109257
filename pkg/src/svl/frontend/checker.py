"""Well-formedness checking: types, predicate arities, purity of protocol
functions and ghost-code discipline.  Problems are reported, not raised."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Assert, Assign, AtomicOp, Binary, Binder, Block, BoolLit, Call, ClassDecl,
    Cond, Emp, FieldRef, Fold, GhostSet, If, Implies, IntLit, IterStar, Loc,
    MethodCall, MethodDecl, Name, NewAtomic, PointsTo, PredInstance, Program,
    Pure, Return, SepConj, SetLit, This, Unary, Unfold, VarDecl, While,
)
from .resolve import HANDLE, SYNC_ROLE, handle_params

NUMERIC = ("int", "frac")
GHOST_ARGS = {"get": ("r", "d", "p"), "set": ("r", "d", "p"), "compareAndSet": ("r", "p")}


@dataclass(frozen=True, order=True)
class Diagnostic:
    loc: Loc
    message: str

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}"


class _Checker:
    def __init__(self, cls: ClassDecl, out: list) -> None:
        self.cls = cls
        self.out = out
        self.fields = {f.name: f for f in cls.fields}
        self.roles = set(cls.roles) | {SYNC_ROLE}

    def diag(self, loc, msg: str) -> None:
        self.out.append(Diagnostic(loc or Loc(0, 0), msg))

    # -- typing ------------------------------------------------------------

    def type_of(self, e, env: dict) -> str:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, BoolLit):
            return "boolean"
        if isinstance(e, Name):
            if e.id in env:
                return env[e.id]
            if e.id in self.roles:
                return "role"
            return "?"
        if isinstance(e, This):
            return self.cls.name
        if isinstance(e, FieldRef):
            f = self.fields.get(e.name)
            if f is not None:
                return f.type
            return "AtomicInteger" if self.cls.atomic(e.name) else "?"
        if isinstance(e, Binder):
            return env.get(e.name, "int")
        if isinstance(e, Unary):
            t = self.type_of(e.operand, env)
            if e.op == "!":
                self.want(e.operand, t, "boolean")
                return "boolean"
            if t not in NUMERIC:
                self.diag(e.loc, f"operand of unary '-' must be numeric, not {t}")
            return t
        if isinstance(e, Binary):
            return self.binary(e, env)
        if isinstance(e, Cond):
            self.want(e.test, self.type_of(e.test, env), "boolean")
            a, b = self.type_of(e.then, env), self.type_of(e.orelse, env)
            if a in NUMERIC and b in NUMERIC:
                return "frac" if "frac" in (a, b) else "int"
            if a != b:
                self.diag(e.loc, f"conditional branches have types {a} and {b}")
            return a
        if isinstance(e, Call):
            f = self.cls.function(e.name)
            if f is None:
                self.diag(e.loc, f"unknown function {e.name!r}")
                return "?"
            if len(e.args) != len(f.params):
                self.diag(e.loc, f"{e.name} expects {len(f.params)} arguments, got {len(e.args)}")
            for a, p in zip(e.args, f.params):
                self.want(a, self.type_of(a, env), p.type)
            return f.ret
        if isinstance(e, SetLit):
            return "Set<role>"
        return "?"

    def binary(self, e: Binary, env: dict) -> str:
        lt, rt = self.type_of(e.left, env), self.type_of(e.right, env)
        op = e.op
        if op in ("&&", "||", "==>"):
            self.want(e.left, lt, "boolean")
            self.want(e.right, rt, "boolean")
            return "boolean"
        if op in ("+", "-", "*", "/", "%"):
            for side, t in ((e.left, lt), (e.right, rt)):
                if t not in NUMERIC:
                    self.diag(getattr(side, "loc", e.loc), f"operand of '{op}' must be numeric, not {t}")
            if op == "/":
                return "frac"
            if op == "%":
                return "int"
            return "frac" if "frac" in (lt, rt) else "int"
        if op in ("<", "<=", ">", ">="):
            for side, t in ((e.left, lt), (e.right, rt)):
                if t not in NUMERIC:
                    self.diag(getattr(side, "loc", e.loc), f"operand of '{op}' must be numeric, not {t}")
            return "boolean"
        if op in ("==", "!="):
            if not (lt == rt or (lt in NUMERIC and rt in NUMERIC) or "?" in (lt, rt)):
                self.diag(e.loc, f"cannot compare {lt} with {rt}")
            return "boolean"
        if op == "**":
            self.diag(e.loc, "separating conjunction in a pure expression")
            return "resource"
        return "?"

    def want(self, e, got: str, want: str) -> None:
        if got == "?" or got == want:
            return
        if want == "frac" and got == "int":
            return
        if want == "int" and got == "frac":
            self.diag(getattr(e, "loc", None), "fractional value where an integer is required")
            return
        self.diag(getattr(e, "loc", None), f"expected {want}, found {got}")

    # -- resources ---------------------------------------------------------

    def resource(self, r, env: dict) -> None:
        if isinstance(r, Emp):
            return
        if isinstance(r, Pure):
            self.want(r.expr, self.type_of(r.expr, env), "boolean")
        elif isinstance(r, SepConj):
            self.resource(r.left, env)
            self.resource(r.right, env)
        elif isinstance(r, Implies):
            self.want(r.cond, self.type_of(r.cond, env), "boolean")
            self.resource(r.body, env)
        elif isinstance(r, IterStar):
            inner = dict(env, **{r.var: "int"})
            self.want(r.range, self.type_of(r.range, inner), "boolean")
            self.resource(r.body, inner)
        elif isinstance(r, PointsTo):
            self.want(r.perm, self.type_of(r.perm, env), "frac")
            if r.value is not None and not isinstance(r.value, Binder):
                self.type_of(r.value, env)
        elif isinstance(r, PredInstance):
            self.pred(r, env)

    def pred(self, r: PredInstance, env: dict) -> None:
        if r.name == HANDLE:
            params = handle_params()
        else:
            decl = self.cls.predicate(r.name)
            if decl is None:
                self.diag(r.loc, f"unknown predicate {r.name!r}")
                return
            params = decl.params
        if len(r.args) != len(params):
            self.diag(r.loc, f"predicate {r.name} expects {len(params)} arguments, got {len(r.args)}")
            return
        for a, p in zip(r.args, params):
            if isinstance(a, Binder):
                env[a.name] = p.type
                continue
            self.want(a, self.type_of(a, env), p.type)

    # -- statements --------------------------------------------------------

    def block(self, b: Block, env: dict, ghosts: set, method: MethodDecl) -> None:
        env, ghosts = dict(env), set(ghosts)
        for s in b.stmts:
            self.stmt(s, env, ghosts, method)

    def is_ghost_target(self, t, ghosts: set) -> bool:
        if isinstance(t, Name):
            return t.id in ghosts
        if isinstance(t, FieldRef):
            f = self.fields.get(t.name)
            return f is not None and f.ghost
        return False

    def stmt(self, s, env: dict, ghosts: set, method: MethodDecl) -> None:
        if isinstance(s, VarDecl):
            if s.init is not None:
                self.want(s.init, self.type_of(s.init, env), s.type)
            env[s.name] = s.type
            if s.ghost:
                ghosts.add(s.name)
        elif isinstance(s, Assign):
            if self.is_ghost_target(s.target, ghosts):
                self.diag(s.loc, "program assignment to ghost state; use 'set'")
            if isinstance(s.target, FieldRef):
                f = self.fields.get(s.target.name)
                if f is not None and f.final and not method.constructor:
                    self.diag(s.loc, f"final field {f.name!r} assigned outside the constructor")
            self.want(s.value, self.type_of(s.value, env), self.type_of(s.target, env))
        elif isinstance(s, GhostSet):
            if not self.is_ghost_target(s.target, ghosts):
                self.diag(s.loc, "ghost 'set' may only assign ghost state")
            self.want(s.value, self.type_of(s.value, env), self.type_of(s.target, env))
        elif isinstance(s, AtomicOp):
            self.atomic(s, env)
        elif isinstance(s, NewAtomic):
            if not method.constructor:
                self.diag(s.loc, "atomic cells can only be created in the constructor")
            self.want(s.arg, self.type_of(s.arg, env), "int")
        elif isinstance(s, MethodCall):
            callee = self.cls.method(s.name)
            if callee is None or callee.constructor:
                self.diag(s.loc, f"unknown method {s.name!r}")
                return
            if len(s.args) != len(callee.params):
                self.diag(s.loc, f"{s.name} expects {len(callee.params)} arguments, got {len(s.args)}")
            for a, p in zip(s.args, callee.params):
                self.want(a, self.type_of(a, env), p.type)
            self.ghost_args(s, s.ghost_args, [g.name for g in callee.given], env,
                            {g.name: g.type for g in callee.given})
        elif isinstance(s, Block):
            self.block(s, env, ghosts, method)
        elif isinstance(s, If):
            self.want(s.cond, self.type_of(s.cond, env), "boolean")
            self.block(s.then, env, ghosts, method)
            if s.orelse is not None:
                self.block(s.orelse, env, ghosts, method)
        elif isinstance(s, While):
            self.want(s.cond, self.type_of(s.cond, env), "boolean")
            for inv in s.invariants:
                self.resource(inv, dict(env))
            self.block(s.body, env, ghosts, method)
        elif isinstance(s, (Fold, Unfold)):
            self.pred(s.pred, env)
            decl = self.cls.predicate(s.pred.name) if s.pred.name != HANDLE else None
            if decl is None or decl.body is None:
                kind = "fold" if isinstance(s, Fold) else "unfold"
                self.diag(s.loc, f"cannot {kind} abstract predicate {s.pred.name!r}")
        elif isinstance(s, Assert):
            self.want(s.expr, self.type_of(s.expr, env), "boolean")
        elif isinstance(s, Return):
            self.diag(s.loc, "return is only allowed in pure functions")

    def atomic(self, s: AtomicOp, env: dict) -> None:
        arity = {"get": 0, "set": 1, "compareAndSet": 2}[s.op]
        if len(s.args) != arity:
            self.diag(s.loc, f"{s.op} expects {arity} arguments, got {len(s.args)}")
        for a in s.args:
            self.want(a, self.type_of(a, env), "int")
        if s.target is not None:
            want = {"get": "int", "compareAndSet": "boolean"}.get(s.op)
            if want is None:
                self.diag(s.loc, "set returns no value")
            else:
                self.want(Name(s.target, s.loc), env.get(s.target, "?"), want)
        types = {"r": "role", "d": "int", "p": "frac"}
        self.ghost_args(s, s.ghost_args, list(GHOST_ARGS[s.op]), env, types)

    def ghost_args(self, s, given: tuple, expected: list, env: dict, types: dict) -> None:
        names = [n for n, _ in given]
        if sorted(names) != sorted(expected):
            self.diag(s.loc, f"'with' clause must bind exactly {{{', '.join(expected)}}}")
        for n, v in given:
            if n in types:
                self.want(v, self.type_of(v, env), types[n])

    # -- declarations ------------------------------------------------------

    def run(self) -> None:
        cls = self.cls
        base = {f.name: f.type for f in cls.fields}
        for g in cls.given:
            base[g.name] = g.type
        for f in cls.functions:
            env = dict(base, **{p.name: p.type for p in f.params})
            body = f.body
            if len(body) != 1 or not isinstance(body[0], Return) or body[0].value is None:
                self.diag(f.loc, f"{f.name} must be pure")
                continue
            if _calls(body[0].value, f.name):
                self.diag(f.loc, f"{f.name} is recursive")
            self.want(body[0].value, self.type_of(body[0].value, env), f.ret)
        for a in cls.atomics:
            share, trans = cls.function(a.share), cls.function(a.trans)
            if share and ([p.type for p in share.params] != ["role", "int"] or share.ret != "frac"):
                self.diag(a.loc, f"share function {a.share} must have type (role,int->frac)")
            if trans and ([p.type for p in trans.params] != ["role", "int", "int"] or trans.ret != "boolean"):
                self.diag(a.loc, f"transition predicate {a.trans} must have type (role,int,int->boolean)")
            inv = cls.predicate(a.inv)
            if inv and not inv.scaled:
                self.diag(a.loc, f"invariant {a.inv} must be a group predicate over a frac")
            if a.bound is not None:
                self.want(a.bound, self.type_of(a.bound, base), "int")
        for p in cls.predicates:
            if p.body is not None:
                self.resource(p.body, dict(base, **{q.name: q.type for q in p.params}))
        for m in cls.methods:
            if m.ret != "void":
                self.diag(m.loc, f"method {m.name} must be void")
            env = dict(base, **{p.name: p.type for p in m.params + m.given})
            for r in m.requires:
                self.resource(r, env)
            self.block(m.body, env, {g.name for g in m.given}, m)
            post = dict(env)
            for r in m.ensures:
                self.resource(r, post)


def _calls(e, name: str) -> bool:
    if isinstance(e, Call) and e.name == name:
        return True
    for v in getattr(e, "__dict__", {}).values():
        if isinstance(v, tuple):
            if any(_calls(x, name) for x in v):
                return True
        elif hasattr(v, "__dataclass_fields__") and _calls(v, name):
            return True
    return False


def wellformed(p: Program) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for c in p.classes:
        _Checker(c, out).run()
    for h in p.harnesses:
        cls = p.cls(h.cls)
        ctor = next((m for m in cls.methods if m.constructor), None) if cls else None
        if ctor is not None and len(ctor.params) != len(h.ctor_args):
            out.append(Diagnostic(h.loc, f"harness {h.name}: constructor expects {len(ctor.params)} arguments"))
        for t in h.threads:
            for a in t.actions:
                m = cls.method(getattr(a, "method", "")) if cls else None
                if m is not None and len(m.params) != len(a.args):
                    out.append(Diagnostic(a.loc, f"{m.name} expects {len(m.params)} arguments"))
    return sorted(out)
