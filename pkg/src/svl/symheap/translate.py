"""Evaluation of resolved SVL expressions into symbolic terms."""

from __future__ import annotations

from ..frontend import ast as A
from ..frontend.resolve import HANDLE, SYNC_ROLE, handle_params
from . import terms as T

THIS = T.Sym("this", "ref")

_SORT = {"int": "int", "frac": "frac", "boolean": "bool", "role": "role"}


class EvalError(Exception):
    """An expression cannot be evaluated in the current symbolic state."""


def sort_for(type_: str) -> str:
    return _SORT.get(type_, "ref")


class Translator:
    """Class-level context: fields, protocol functions and predicate definitions."""

    def __init__(self, cls: A.ClassDecl) -> None:
        self.cls = cls
        self.roles = set(cls.roles) | {SYNC_ROLE}
        self.fields = {f.name: f for f in cls.fields}
        self.functions = {f.name: f for f in cls.functions}
        self.atomics = {a.name: a for a in cls.atomics}

    # -- declarations --------------------------------------------------------

    def pred(self, name: str) -> A.PredicateDecl:
        if name == HANDLE:
            return A.PredicateDecl(HANDLE, handle_params(), None, True)
        p = self.cls.predicate(name)
        if p is None:
            raise EvalError(f"unknown predicate {name}")
        return p

    def is_immutable(self, field: str) -> bool:
        f = self.fields[field]
        return f.final or f.ghost

    def field_symbol(self, field: str) -> T.Sym:
        return T.Sym(field, sort_for(self.fields[field].type))

    def receiver(self, e) -> T.Term:
        if isinstance(e, A.This):
            return THIS
        if isinstance(e, A.FieldRef) and isinstance(e.obj, A.This):
            return T.Field(THIS, e.name)
        raise EvalError("unsupported receiver")

    # -- static types ----------------------------------------------------------

    def type_of(self, e, types: dict) -> str:
        if isinstance(e, A.IntLit):
            return "int"
        if isinstance(e, A.BoolLit):
            return "boolean"
        if isinstance(e, A.Name):
            if e.id in types:
                return types[e.id]
            if e.id in self.roles:
                return "role"
            return "int"
        if isinstance(e, A.FieldRef):
            f = self.fields.get(e.name)
            return f.type if f else "ref"
        if isinstance(e, A.Unary):
            return "boolean" if e.op == "!" else self.type_of(e.operand, types)
        if isinstance(e, A.Binary):
            if e.op in ("&&", "||", "==>", "==", "!=", "<", "<=", ">", ">="):
                return "boolean"
            if e.op == "/":
                return "frac"
            a, b = self.type_of(e.left, types), self.type_of(e.right, types)
            return "frac" if "frac" in (a, b) else "int"
        if isinstance(e, A.Cond):
            a, b = self.type_of(e.then, types), self.type_of(e.orelse, types)
            return "frac" if "frac" in (a, b) else a
        if isinstance(e, A.Call):
            f = self.functions.get(e.name)
            return f.ret if f else "int"
        return "int"

    # -- evaluation ------------------------------------------------------------

    def term(self, e, env: dict, types: dict, heap=None) -> T.Term:
        """Translate ``e``; ``env`` maps names to terms, ``types`` to declared types."""
        if isinstance(e, A.IntLit):
            return T.num(e.value)
        if isinstance(e, A.BoolLit):
            return T.BoolC(e.value)
        if isinstance(e, A.Name):
            if e.id in env:
                return env[e.id]
            if e.id in self.roles:
                return T.RoleC(e.id)
            raise EvalError(f"no value for {e.id}")
        if isinstance(e, A.This):
            return THIS
        if isinstance(e, A.FieldRef):
            if not isinstance(e.obj, A.This):
                raise EvalError("only fields of this are supported")
            if e.name in self.atomics:
                return T.Field(THIS, e.name)
            if self.is_immutable(e.name):
                return self.field_symbol(e.name)
            if heap is None:
                raise EvalError(f"cannot read this.{e.name} here")
            v = heap.read(T.Field(THIS, e.name))
            if v is None:
                raise EvalError(f"no permission to read this.{e.name}")
            return v
        if isinstance(e, A.Unary):
            v = self.term(e.operand, env, types, heap)
            return T.not_(v) if e.op == "!" else T.neg(v)
        if isinstance(e, A.Binary):
            a = self.term(e.left, env, types, heap)
            b = self.term(e.right, env, types, heap)
            op = e.op
            if op == "&&":
                return T.and_(a, b)
            if op == "||":
                return T.or_(a, b)
            if op == "==>":
                return T.implies(a, b)
            if op in ("==", "!=", "<", "<=", ">", ">="):
                return T.cmp(op, a, b)
            if op == "+":
                return T.add(a, b)
            if op == "*":
                return T.mul(a, b)
            if op == "/":
                return T.div(a, b)
            if op == "-":
                frac = "frac" in (self.type_of(e.left, types), self.type_of(e.right, types))
                return T.cutsub(a, b) if frac else T.sub(a, b)
            raise EvalError(f"operator {op} is not supported in annotations")
        if isinstance(e, A.Cond):
            return T.ite(self.term(e.test, env, types, heap), self.term(e.then, env, types, heap),
                         self.term(e.orelse, env, types, heap))
        if isinstance(e, A.Call) and e.recv is None:
            return self.call(e.name, [self.term(a, env, types, heap) for a in e.args])
        raise EvalError(f"cannot evaluate {type(e).__name__}")

    def call(self, name: str, args: list) -> T.Term:
        """Inline a pure function applied to argument terms."""
        f = self.functions.get(name)
        if f is None:
            raise EvalError(f"unknown function {name}")
        if len(f.body) != 1 or not isinstance(f.body[0], A.Return) or f.body[0].value is None:
            raise EvalError(f"{name} is not a pure function")
        env = {p.name: a for p, a in zip(f.params, args)}
        types = {p.name: p.type for p in f.params}
        return self.term(f.body[0].value, env, types)
