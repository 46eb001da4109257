"""Syntax tree for SVL programs.

Nodes are frozen dataclasses.  Source locations never take part in
equality, so two parses of the same text compare equal even if the layout
differs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True, order=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOLOC = Loc(0, 0)


def _loc():
    return field(default=NOLOC, compare=False, repr=False)


# ---------------------------------------------------------------------------
# expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Loc = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Loc = _loc()


@dataclass(frozen=True)
class Name:
    id: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class This:
    loc: Loc = _loc()


@dataclass(frozen=True)
class FieldRef:
    obj: "Expr"
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Cond:
    test: "Expr"
    then: "Expr"
    orelse: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Call:
    """Function, predicate or method application.  ``recv`` is None for a
    bare call such as ``share(S, c)``."""

    recv: Optional["Expr"]
    name: str
    args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class Binder:
    """``?x`` in a postcondition: binds a fresh ghost variable."""

    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class SetLit:
    items: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class ForallStar:
    """``(\\forall* int i; range; body)`` before resolution."""

    var: str
    range: "Expr"
    body: "Expr"
    loc: Loc = _loc()


Expr = Union[IntLit, BoolLit, Name, This, FieldRef, Unary, Binary, Cond, Call,
             Binder, SetLit, ForallStar]


# ---------------------------------------------------------------------------
# resource expressions (produced by resolution)

@dataclass(frozen=True)
class Emp:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Pure:
    expr: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class PointsTo:
    """``Perm(target, perm)`` (value None) or ``PointsTo(target, perm, v)``."""

    target: Expr
    perm: Expr
    value: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(frozen=True)
class PredInstance:
    """``recv.name(args)``.  ``recv`` is ``This()`` for class predicates and
    given predicates, or ``FieldRef(This(), cell)`` for a cell's handle."""

    recv: Expr
    name: str
    args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class SepConj:
    left: "Resource"
    right: "Resource"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Implies:
    cond: Expr
    body: "Resource"
    loc: Loc = _loc()


@dataclass(frozen=True)
class IterStar:
    var: str
    range: Expr
    body: "Resource"
    loc: Loc = _loc()


Resource = Union[Emp, Pure, PointsTo, PredInstance, SepConj, Implies, IterStar]


# ---------------------------------------------------------------------------
# statements

@dataclass(frozen=True)
class VarDecl:
    type: str
    name: str
    init: Optional[Expr]
    ghost: bool = False
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assign:
    target: Expr  # Name or FieldRef
    value: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class AtomicOp:
    """``[target =] cell.op(args) [with {..}]`` for get/set/compareAndSet."""

    target: Optional[str]
    cell: str
    op: str
    args: tuple
    ghost_args: tuple  # of (name, Expr)
    loc: Loc = _loc()


@dataclass(frozen=True)
class NewAtomic:
    cell: str
    params: tuple
    arg: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class MethodCall:
    recv: Expr
    name: str
    args: tuple
    ghost_args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class Block:
    stmts: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block]
    loc: Loc = _loc()


@dataclass(frozen=True)
class While:
    cond: Expr
    invariants: tuple  # raw Expr before resolution, Resource after
    body: Block
    loc: Loc = _loc()


@dataclass(frozen=True)
class Fold:
    pred: object  # Call before resolution, PredInstance after
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unfold:
    pred: object
    loc: Loc = _loc()


@dataclass(frozen=True)
class GhostSet:
    target: Expr
    value: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assert:
    expr: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr]
    loc: Loc = _loc()


Stmt = Union[VarDecl, Assign, AtomicOp, NewAtomic, MethodCall, Block, If, While,
             Fold, Unfold, GhostSet, Assert, Return]


# ---------------------------------------------------------------------------
# declarations

@dataclass(frozen=True)
class Param:
    type: str
    name: str
    group: bool = False
    loc: Loc = _loc()


@dataclass(frozen=True)
class FieldDecl:
    type: str
    name: str
    ghost: bool = False
    final: bool = False
    init: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(frozen=True)
class AtomicField:
    """``AtomicInteger<roles, inv, share, trans[, bound]> name``."""

    name: str
    roles: str
    inv: str
    share: str
    trans: str
    bound: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple
    body: object  # Expr before resolution, Resource after; None = abstract
    group: bool = False
    loc: Loc = _loc()

    @property
    def scaled(self) -> bool:
        """Group predicates whose last parameter is a ``frac`` carry it as a
        splittable scale."""
        return self.group and bool(self.params) and self.params[-1].type == "frac"


@dataclass(frozen=True)
class FunctionDecl:
    ret: str
    name: str
    params: tuple
    body: tuple  # statements; a pure function is a single Return
    loc: Loc = _loc()


@dataclass(frozen=True)
class MethodDecl:
    name: str
    ret: str
    params: tuple
    given: tuple
    requires: tuple
    ensures: tuple
    body: Block
    constructor: bool = False
    loc: Loc = _loc()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    given: tuple
    fields: tuple
    atomics: tuple
    predicates: tuple
    functions: tuple
    methods: tuple
    loc: Loc = _loc()

    def predicate(self, name: str) -> Optional[PredicateDecl]:
        for p in self.predicates:
            if p.name == name:
                return p
        for g in self.given:
            if g.name == name and "resource" in g.type:
                return given_predicate(g)
        return None

    def function(self, name: str) -> Optional[FunctionDecl]:
        return next((f for f in self.functions if f.name == name), None)

    def method(self, name: str) -> Optional[MethodDecl]:
        return next((m for m in self.methods if m.name == name), None)

    def atomic(self, name: str) -> Optional[AtomicField]:
        return next((a for a in self.atomics if a.name == name), None)

    def field(self, name: str) -> Optional[FieldDecl]:
        return next((f for f in self.fields if f.name == name), None)

    @property
    def roles(self) -> tuple:
        """Role labels declared by ``Set<role>`` fields, in source order."""
        out = []
        for f in self.fields:
            if f.type == "Set<role>" and isinstance(f.init, SetLit):
                for item in f.init.items:
                    if isinstance(item, Name) and item.id not in out:
                        out.append(item.id)
        return tuple(out)

    def role_set(self, name: str) -> tuple:
        f = self.field(name)
        if f is None or not isinstance(f.init, SetLit):
            return ()
        return tuple(i.id for i in f.init.items if isinstance(i, Name))


def function_type_params(type_: str) -> list:
    """Argument types of a function type such as ``(role,int->frac)``."""
    inner = type_.strip()[1:-1]
    args = inner.split("->")[0]
    return [a.strip() for a in args.split(",") if a.strip()]


def given_predicate(g: Param) -> PredicateDecl:
    """View an abstract ``given (frac -> resource) name`` as a predicate."""
    params = tuple(Param(t, f"a{i}") for i, t in enumerate(function_type_params(g.type)))
    return PredicateDecl(g.name, params, None, g.group, g.loc)


@dataclass(frozen=True)
class Access:
    kind: str  # "read" | "write"
    location: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Invoke:
    method: str
    args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class ThreadDecl:
    name: str
    role: str
    holds: tuple  # of (location, Expr)
    actions: tuple  # Access | Invoke
    loc: Loc = _loc()


@dataclass(frozen=True)
class HarnessDecl:
    """Concrete setup for the interleaving oracle."""

    name: str
    cls: str
    locations: tuple
    bindings: tuple  # (given predicate name, location)
    ctor_args: tuple
    threads: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class Program:
    classes: tuple = ()
    harnesses: tuple = ()

    def cls(self, name: str) -> Optional[ClassDecl]:
        return next((c for c in self.classes if c.name == name), None)
