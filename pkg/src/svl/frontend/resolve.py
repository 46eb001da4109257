"""Name resolution.

Turns raw annotation expressions into resource trees, rewrites field
names to explicit ``this.f`` references, maps ``cell.inv``/``cell.share``/
``cell.trans`` through the cell's protocol parameters and rejects unknown
identifiers and duplicate declarations.
"""

from __future__ import annotations

from dataclasses import replace

from .ast import (
    Access, Assert, Assign, AtomicOp, Binary, Binder, Block, BoolLit, Call,
    ClassDecl, Cond, Emp, FieldRef, Fold, ForallStar, GhostSet, HarnessDecl,
    If, Implies, IntLit, Invoke, IterStar, MethodCall, MethodDecl, Name, Param,
    NewAtomic, PointsTo, PredInstance, Program, Pure, Return, SepConj, SetLit,
    This, Unary, Unfold, VarDecl, While, function_type_params,
)
from .lexer import ParseError

SYNC_ROLE = "S"
HANDLE = "handle"


class ResolveError(ParseError):
    """An identifier does not resolve or is declared twice."""


class Scope:
    """Visible names with their types.  ``locals`` are names declared by the
    method or predicate itself; they shadow fields."""

    def __init__(self, names: dict | None = None, locals_: set | None = None) -> None:
        self.names: dict[str, str] = dict(names or {})
        self.locals: set[str] = set(locals_ or ())

    def child(self) -> "Scope":
        return Scope(self.names, self.locals)

    def declare(self, name: str, type_: str, loc) -> None:
        if name in self.locals:
            raise ResolveError(f"duplicate declaration of {name!r}", loc)
        self.names[name] = type_
        self.locals.add(name)


def handle_params() -> tuple:
    return (Param("role", "r"), Param("int", "d"), Param("frac", "p"))


class ClassResolver:
    def __init__(self, cls: ClassDecl) -> None:
        self.cls = cls
        seen: set[str] = set()
        for n in ([g.name for g in cls.given] + [f.name for f in cls.fields]
                  + [a.name for a in cls.atomics] + [p.name for p in cls.predicates]
                  + [f.name for f in cls.functions]
                  + [m.name for m in cls.methods if not m.constructor]):
            if n in seen:
                raise ResolveError(f"duplicate declaration of {n!r} in class {cls.name}", cls.loc)
            seen.add(n)
        if sum(1 for m in cls.methods if m.constructor) > 1:
            raise ResolveError(f"class {cls.name} declares more than one constructor", cls.loc)
        self.roles = set(cls.roles) | {SYNC_ROLE}
        self.fields = {f.name: f.type for f in cls.fields}
        self.pred_names = {p.name for p in cls.predicates} | {
            g.name for g in cls.given if "resource" in g.type}
        self.func_names = {f.name for f in cls.functions}
        self.atomics = {a.name: a for a in cls.atomics}
        for a in cls.atomics:
            if a.roles not in self.fields or self.fields[a.roles] != "Set<role>":
                raise ResolveError(f"protocol roles {a.roles!r} is not a Set<role> field", a.loc)
            if a.inv not in self.pred_names:
                raise ResolveError(f"protocol invariant {a.inv!r} is not a predicate", a.loc)
            for fn in (a.share, a.trans):
                if fn not in self.func_names:
                    raise ResolveError(f"protocol function {fn!r} is not declared", a.loc)

    def base_scope(self) -> Scope:
        s = Scope()
        for r in self.roles:
            s.names[r] = "role"
        for g in self.cls.given:
            s.names[g.name] = g.type
        for f in self.cls.fields:
            s.names[f.name] = f.type
        return s

    # -- expressions -------------------------------------------------------

    def expr(self, e, scope: Scope):
        if isinstance(e, (IntLit, BoolLit, This)):
            return e
        if isinstance(e, Name):
            t = scope.names.get(e.id)
            if t is None:
                raise ResolveError(f"undeclared name {e.id!r}", e.loc)
            if e.id in self.fields and self._is_field(e.id, scope):
                return FieldRef(This(e.loc), e.id, e.loc)
            return e
        if isinstance(e, FieldRef):
            if isinstance(e.obj, This):
                if e.name not in self.fields and e.name not in self.atomics:
                    raise ResolveError(f"unknown field {e.name!r}", e.loc)
                return e
            obj = self.expr(e.obj, scope)
            return replace(e, obj=obj)
        if isinstance(e, Unary):
            return replace(e, operand=self.expr(e.operand, scope))
        if isinstance(e, Binary):
            return replace(e, left=self.expr(e.left, scope), right=self.expr(e.right, scope))
        if isinstance(e, Cond):
            return replace(e, test=self.expr(e.test, scope), then=self.expr(e.then, scope),
                           orelse=self.expr(e.orelse, scope))
        if isinstance(e, Call):
            fn = self._function_name(e)
            if fn is None:
                raise ResolveError(f"unknown function {e.name!r}", e.loc)
            return Call(None, fn, tuple(self.expr(a, scope) for a in e.args), e.loc)
        if isinstance(e, SetLit):
            return replace(e, items=tuple(self.expr(i, scope) for i in e.items))
        if isinstance(e, Binder):
            raise ResolveError("'?' binder outside a postcondition", e.loc)
        raise ResolveError(f"unexpected {type(e).__name__} in expression", getattr(e, "loc", None))

    def _is_field(self, name: str, scope: Scope) -> bool:
        return name in self.fields and name not in scope.locals

    def _cell_of(self, recv):
        if isinstance(recv, Name) and recv.id in self.atomics:
            return recv.id
        if isinstance(recv, FieldRef) and isinstance(recv.obj, This) and recv.name in self.atomics:
            return recv.name
        return None

    def _function_name(self, call: Call):
        if call.recv is None or isinstance(call.recv, This):
            return call.name if call.name in self.func_names else None
        cell = self._cell_of(call.recv)
        if cell is not None:
            a = self.atomics[cell]
            if call.name == "share":
                return a.share
            if call.name == "trans":
                return a.trans
            if call.name in (a.share, a.trans):
                return call.name
        return None

    def pred_target(self, call: Call):
        """(receiver, predicate name) for a predicate application, or None."""
        if call.recv is None or isinstance(call.recv, This):
            if call.name in self.pred_names:
                return This(call.loc), call.name
            return None
        cell = self._cell_of(call.recv)
        if cell is None:
            return None
        if call.name == HANDLE:
            return FieldRef(This(call.loc), cell, call.loc), HANDLE
        a = self.atomics[cell]
        if call.name in ("inv", a.inv):
            return This(call.loc), a.inv
        return None

    def is_resource(self, e) -> bool:
        if isinstance(e, Call):
            return e.name in ("Perm", "PointsTo") or self.pred_target(e) is not None
        if isinstance(e, ForallStar):
            return True
        if isinstance(e, Binary) and e.op in ("**", "==>"):
            return self.is_resource(e.right) or (e.op == "**" and self.is_resource(e.left))
        return False

    def resource(self, e, scope: Scope, binders: bool = False):
        if isinstance(e, Binary) and e.op == "**":
            left = self.resource(e.left, scope, binders)
            right = self.resource(e.right, scope, binders)
            return SepConj(left, right, e.loc)
        if isinstance(e, Binary) and e.op == "==>" and self.is_resource(e.right):
            return Implies(self.expr(e.left, scope),
                           self.resource(e.right, scope, binders), e.loc)
        if isinstance(e, ForallStar):
            inner = scope.child()
            inner.declare(e.var, "int", e.loc)
            return IterStar(e.var, self.expr(e.range, inner),
                            self.resource(e.body, inner, binders), e.loc)
        if isinstance(e, Call) and e.name in ("Perm", "PointsTo") and e.recv is None:
            want = 2 if e.name == "Perm" else 3
            if len(e.args) != want:
                raise ResolveError(f"{e.name} takes {want} arguments", e.loc)
            target = self.expr(e.args[0], scope)
            if not isinstance(target, FieldRef):
                raise ResolveError(f"{e.name} target must be a field", e.loc)
            value = None
            if want == 3:
                value = self.arg(e.args[2], scope, binders, "int")
            return PointsTo(target, self.expr(e.args[1], scope), value, e.loc)
        if isinstance(e, Call):
            target = self.pred_target(e)
            if target is not None:
                recv, name = target
                params = self.pred_params(name)
                args = []
                for i, a in enumerate(e.args):
                    t = params[i].type if i < len(params) else "int"
                    args.append(self.arg(a, scope, binders, t))
                return PredInstance(recv, name, tuple(args), e.loc)
        if isinstance(e, BoolLit) and e.value:
            return Emp(e.loc)
        return Pure(self.expr(e, scope), getattr(e, "loc", None))

    def arg(self, a, scope: Scope, binders: bool, type_: str):
        if isinstance(a, Binder):
            if not binders:
                raise ResolveError("'?' binder outside a postcondition", a.loc)
            scope.declare(a.name, type_, a.loc)
            return a
        return self.expr(a, scope)

    def pred_params(self, name: str) -> tuple:
        if name == HANDLE:
            return handle_params()
        p = self.cls.predicate(name)
        return p.params if p is not None else ()

    # -- statements --------------------------------------------------------

    def block(self, b: Block, scope: Scope, method: MethodDecl) -> Block:
        inner = scope.child()
        return Block(tuple(self.stmt(s, inner, method) for s in b.stmts), b.loc)

    def stmt(self, s, scope: Scope, method: MethodDecl):
        if isinstance(s, VarDecl):
            init = self.expr(s.init, scope) if s.init is not None else None
            scope.declare(s.name, s.type, s.loc)
            return replace(s, init=init)
        if isinstance(s, (Assign, GhostSet)):
            target = self.expr(s.target, scope)
            if not isinstance(target, (Name, FieldRef)):
                raise ResolveError("invalid assignment target", s.loc)
            return replace(s, target=target, value=self.expr(s.value, scope))
        if isinstance(s, AtomicOp):
            if s.cell not in self.atomics:
                raise ResolveError(f"{s.cell!r} is not an atomic cell", s.loc)
            if s.target is not None and s.target not in scope.names:
                raise ResolveError(f"undeclared name {s.target!r}", s.loc)
            return replace(s, args=tuple(self.expr(a, scope) for a in s.args),
                           ghost_args=tuple((n, self.expr(v, scope)) for n, v in s.ghost_args))
        if isinstance(s, NewAtomic):
            if s.cell not in self.atomics:
                raise ResolveError(f"{s.cell!r} is not an atomic cell", s.loc)
            return replace(s, arg=self.expr(s.arg, scope))
        if isinstance(s, MethodCall):
            if not isinstance(s.recv, This) or self.cls.method(s.name) is None:
                raise ResolveError(f"unknown method {s.name!r}", s.loc)
            return replace(s, args=tuple(self.expr(a, scope) for a in s.args),
                           ghost_args=tuple((n, self.expr(v, scope)) for n, v in s.ghost_args))
        if isinstance(s, Block):
            return self.block(s, scope, method)
        if isinstance(s, If):
            return If(self.expr(s.cond, scope), self.block(s.then, scope, method),
                      self.block(s.orelse, scope, method) if s.orelse else None, s.loc)
        if isinstance(s, While):
            invs = tuple(self.resource(i, scope) for i in s.invariants)
            return While(self.expr(s.cond, scope), invs, self.block(s.body, scope, method), s.loc)
        if isinstance(s, (Fold, Unfold)):
            res = self.resource(s.pred, scope) if isinstance(s.pred, Call) else None
            if not isinstance(res, PredInstance):
                raise ResolveError(f"unknown predicate {getattr(s.pred, 'name', '?')!r}", s.loc)
            return replace(s, pred=res)
        if isinstance(s, Assert):
            return replace(s, expr=self.expr(s.expr, scope))
        if isinstance(s, Return):
            return replace(s, value=self.expr(s.value, scope) if s.value is not None else None)
        raise ResolveError(f"unexpected statement {type(s).__name__}", getattr(s, "loc", None))

    # -- declarations ------------------------------------------------------

    def resolve(self) -> ClassDecl:
        cls = self.cls
        base = self.base_scope()
        preds = []
        for p in cls.predicates:
            sc = base.child()
            for prm in p.params:
                sc.declare(prm.name, prm.type, prm.loc)
            body = self.resource(p.body, sc) if p.body is not None else None
            preds.append(replace(p, body=body))
        funcs = []
        for f in cls.functions:
            sc = base.child()
            for prm in f.params:
                sc.declare(prm.name, prm.type, prm.loc)
            funcs.append(replace(f, body=tuple(self.stmt(s, sc, None) for s in f.body)))
        fields = []
        for fd in cls.fields:
            if fd.init is not None and not isinstance(fd.init, SetLit):
                fields.append(replace(fd, init=self.expr(fd.init, base)))
            else:
                fields.append(fd)
        atomics = []
        for a in cls.atomics:
            atomics.append(replace(a, bound=self.expr(a.bound, base) if a.bound is not None else None))
        methods = [self.method(m, base) for m in cls.methods]
        return replace(cls, predicates=tuple(preds), functions=tuple(funcs), fields=tuple(fields),
                       atomics=tuple(atomics), methods=tuple(methods))

    def method(self, m: MethodDecl, base: Scope) -> MethodDecl:
        sc = base.child()
        for prm in m.params + m.given:
            sc.declare(prm.name, prm.type, prm.loc)
        requires = tuple(self.resource(r, sc) for r in m.requires)
        body = self.block(m.body, sc, m)
        post = sc.child()
        ensures = tuple(self.resource(e, post, binders=True) for e in m.ensures)
        return replace(m, requires=requires, ensures=ensures, body=body)


def resolve_harness(h: HarnessDecl, program: Program) -> HarnessDecl:
    cls = program.cls(h.cls)
    if cls is None:
        raise ResolveError(f"harness {h.name!r} names unknown class {h.cls!r}", h.loc)
    roles = set(cls.roles)
    for pred, where in h.bindings:
        g = next((g for g in cls.given if g.name == pred), None)
        if g is None or function_type_params(g.type) != ["frac"]:
            raise ResolveError(f"harness binds {pred!r}, which is not a given (frac->resource)", h.loc)
        if where not in h.locations:
            raise ResolveError(f"unknown location {where!r}", h.loc)
    for t in h.threads:
        if t.role not in roles:
            raise ResolveError(f"unknown role {t.role!r} for thread {t.name!r}", t.loc)
        for where, _ in t.holds:
            if where not in h.locations:
                raise ResolveError(f"unknown location {where!r}", t.loc)
        for a in t.actions:
            if isinstance(a, Access) and a.location not in h.locations:
                raise ResolveError(f"unknown location {a.location!r}", a.loc)
            if isinstance(a, Invoke):
                m = cls.method(a.method)
                if m is None or m.constructor:
                    raise ResolveError(f"unknown method {a.method!r}", a.loc)
    names = [t.name for t in h.threads]
    if len(set(names)) != len(names):
        raise ResolveError(f"duplicate thread name in harness {h.name!r}", h.loc)
    return h


def resolve_program(p: Program) -> Program:
    names = [c.name for c in p.classes]
    if len(set(names)) != len(names):
        raise ResolveError("duplicate class declaration")
    classes = tuple(ClassResolver(c).resolve() for c in p.classes)
    resolved = Program(classes, ())
    hnames = [h.name for h in p.harnesses]
    if len(set(hnames)) != len(hnames):
        raise ResolveError("duplicate harness declaration")
    harnesses = tuple(resolve_harness(h, resolved) for h in p.harnesses)
    return Program(classes, harnesses)
