"""Pretty printer.  Output reparses to a structurally identical program."""

from __future__ import annotations

from .ast import (
    Access, Assert, Assign, AtomicOp, Binary, Binder, Block, BoolLit, Call,
    ClassDecl, Cond, Emp, FieldRef, Fold, ForallStar, GhostSet, HarnessDecl,
    If, Implies, IntLit, IterStar, MethodCall, MethodDecl, Name, NewAtomic,
    PointsTo, PredInstance, Program, Pure, Return, SepConj, SetLit, This,
    Unary, Unfold, VarDecl, While,
)


def expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Name):
        return e.id
    if isinstance(e, This):
        return "this"
    if isinstance(e, FieldRef):
        return f"{expr(e.obj)}.{e.name}"
    if isinstance(e, Unary):
        return f"({e.op}{expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, Cond):
        return f"({expr(e.test)} ? {expr(e.then)} : {expr(e.orelse)})"
    if isinstance(e, Call):
        prefix = f"{expr(e.recv)}." if e.recv is not None else ""
        return f"{prefix}{e.name}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, Binder):
        return f"?{e.name}"
    if isinstance(e, SetLit):
        return "{" + ", ".join(expr(i) for i in e.items) + "}"
    if isinstance(e, ForallStar):
        return f"(\\forall* int {e.var}; {expr(e.range)}; {expr(e.body)})"
    return resource(e)


def resource(r) -> str:
    if isinstance(r, Emp):
        return "true"
    if isinstance(r, Pure):
        return expr(r.expr)
    if isinstance(r, PointsTo):
        if r.value is None:
            return f"Perm({expr(r.target)}, {expr(r.perm)})"
        return f"PointsTo({expr(r.target)}, {expr(r.perm)}, {expr(r.value)})"
    if isinstance(r, PredInstance):
        prefix = "" if isinstance(r.recv, This) else f"{expr(r.recv)}."
        return f"{prefix}{r.name}({', '.join(expr(a) for a in r.args)})"
    if isinstance(r, SepConj):
        return f"({resource(r.left)} ** {resource(r.right)})"
    if isinstance(r, Implies):
        return f"({expr(r.cond)} ==> {resource(r.body)})"
    if isinstance(r, IterStar):
        return f"(\\forall* int {r.var}; {expr(r.range)}; {resource(r.body)})"
    return expr(r)


def _params(ps) -> str:
    return ", ".join(f"{'group ' if p.group else ''}{p.type} {p.name}" for p in ps)


def _with(ghost_args) -> str:
    if not ghost_args:
        return ""
    inner = ", ".join(f"{n} = {expr(v)}" for n, v in ghost_args)
    return f" /*@ with {{{inner}}} @*/"


def stmt(s, ind: str) -> list[str]:
    if isinstance(s, Block):
        out = [ind + "{"]
        for x in s.stmts:
            out += stmt(x, ind + "  ")
        return out + [ind + "}"]
    if isinstance(s, VarDecl):
        init = f" = {expr(s.init)}" if s.init is not None else ""
        decl = f"{s.type} {s.name}{init};"
        return [ind + (f"/*@ ghost {decl} @*/" if s.ghost else decl)]
    if isinstance(s, Assign):
        return [ind + f"{expr(s.target)} = {expr(s.value)};"]
    if isinstance(s, AtomicOp):
        lhs = f"{s.target} = " if s.target else ""
        args = ", ".join(expr(a) for a in s.args)
        return [ind + f"{lhs}this.{s.cell}.{s.op}({args}){_with(s.ghost_args)};"]
    if isinstance(s, NewAtomic):
        params = f"<{', '.join(s.params)}>" if s.params else ""
        return [ind + f"this.{s.cell} = new AtomicInteger{params}({expr(s.arg)});"]
    if isinstance(s, MethodCall):
        args = ", ".join(expr(a) for a in s.args)
        return [ind + f"{expr(s.recv)}.{s.name}({args}){_with(s.ghost_args)};"]
    if isinstance(s, If):
        out = [ind + f"if ({expr(s.cond)})"] + stmt(s.then, ind)
        if s.orelse is not None:
            out += [ind + "else"] + stmt(s.orelse, ind)
        return out
    if isinstance(s, While):
        out = [ind + f"while ({expr(s.cond)})"]
        for inv in s.invariants:
            out.append(ind + f"  /*@ loop_invariant {resource(inv)}; @*/")
        return out + stmt(s.body, ind)
    if isinstance(s, Fold):
        return [ind + f"/*@ fold {resource(s.pred)}; @*/"]
    if isinstance(s, Unfold):
        return [ind + f"/*@ unfold {resource(s.pred)}; @*/"]
    if isinstance(s, GhostSet):
        return [ind + f"/*@ set {expr(s.target)} = {expr(s.value)}; @*/"]
    if isinstance(s, Assert):
        return [ind + f"/*@ assert {expr(s.expr)}; @*/"]
    if isinstance(s, Return):
        return [ind + ("return;" if s.value is None else f"return {expr(s.value)};")]
    raise TypeError(f"cannot print {type(s).__name__}")


def method(m: MethodDecl, cls_name: str, ind: str) -> list[str]:
    spec = []
    if m.given:
        spec.append(f"given {_params(m.given)};")
    spec += [f"requires {resource(r)};" for r in m.requires]
    spec += [f"ensures {resource(r)};" for r in m.ensures]
    out = []
    if spec:
        out.append(ind + "/*@ " + (" ".join(spec)) + " @*/")
    head = f"{cls_name}({_params(m.params)})" if m.constructor else f"{m.ret} {m.name}({_params(m.params)})"
    return out + [ind + head] + stmt(m.body, ind)


def class_decl(c: ClassDecl) -> list[str]:
    out = []
    if c.given:
        out.append("/*@ given " + ", ".join(f"{'group ' if g.group else ''}{g.type} {g.name}"
                                            for g in c.given) + "; @*/")
    out.append(f"class {c.name} {{")
    ind = "  "
    for f in c.fields:
        init = f" = {expr(f.init)}" if f.init is not None else ""
        mods = ("final " if f.final else "")
        decl = f"{mods}{f.type} {f.name}{init};"
        out.append(ind + (f"/*@ ghost {decl} @*/" if f.ghost else decl))
    for p in c.predicates:
        body = f" = {resource(p.body)}" if p.body is not None else ""
        out.append(ind + f"/*@ {'group ' if p.group else ''}resource {p.name}({_params(p.params)}){body}; @*/")
    for f in c.functions:
        body = " ".join(" ".join(x.strip() for x in stmt(s, "")) for s in f.body)
        out.append(ind + f"/*@ {f.ret} {f.name}({_params(f.params)}) {{ {body} }} @*/")
    for a in c.atomics:
        params = [a.roles, a.inv, a.share, a.trans]
        if a.bound is not None:
            params.append(expr(a.bound))
        out.append(ind + f"AtomicInteger<{', '.join(params)}> {a.name};")
    for m in c.methods:
        out += method(m, c.name, ind)
    return out + ["}"]


def harness(h: HarnessDecl) -> list[str]:
    out = [f"/*@ harness {h.name} for {h.cls} {{"]
    if h.locations:
        out.append(f"  location {', '.join(h.locations)};")
    for pred, where in h.bindings:
        out.append(f"  {pred}(p) = {where};")
    out.append(f"  new({', '.join(expr(a) for a in h.ctor_args)});")
    for t in h.threads:
        holds = ""
        if t.holds:
            holds = " holds " + ", ".join(f"{w} {expr(v)}" for w, v in t.holds)
        out.append(f"  thread {t.name} as {t.role}{holds} {{")
        for a in t.actions:
            if isinstance(a, Access):
                out.append(f"    {a.kind} {a.location};")
            else:
                out.append(f"    {a.method}({', '.join(expr(x) for x in a.args)});")
        out.append("  }")
    return out + ["} @*/"]


def pretty(p: Program) -> str:
    lines: list[str] = []
    for c in p.classes:
        lines += class_decl(c) + [""]
    for h in p.harnesses:
        lines += harness(h) + [""]
    return "\n".join(lines)
