"""Concrete small-step interpreter with a permission ledger.

A machine state is an immutable, hashable value: per-thread continuation
stacks and local stores, atomic cell contents, final field values and the
ledger, which maps every location to the fraction each holder owns.  Ghost
code (folds, unfolds, ghost variables and assertions) is never executed;
permission moves happen only at atomic operations and follow the cell
contract.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction as Q

from ..frontend import ast as A
from ..frontend.resolve import HANDLE, SYNC_ROLE
from ..permission import (
    ONE, ZERO, Fraction as Perm, PermissionOverflow, PermissionRangeError,
    frac_add, frac_cutoff_sub,
)

MAIN = "main"


class OracleError(Exception):
    """The program or harness uses something the interpreter cannot run."""


class LoopCapExceeded(Exception):
    """A loop ran more iterations than the configured cap."""


class ViolationEvent(Exception):
    def __init__(self, kind: str, location: str, thread: str, message: str, line: int = 0) -> None:
        super().__init__(message)
        self.kind = kind
        self.location = location
        self.thread = thread
        self.message = message
        self.line = line


@dataclass(frozen=True)
class ThreadState:
    stack: tuple  # top of stack is the last item
    store: tuple  # sorted (name, value) pairs
    views: tuple  # sorted (cell, last observed value) pairs

    @property
    def finished(self) -> bool:
        return not self.stack


@dataclass(frozen=True)
class MachineState:
    threads: tuple
    cells: tuple  # sorted (cell, value)
    fields: tuple  # sorted (field, value)
    ledger: tuple  # sorted (location, holder, Perm), zero entries omitted


def cell_holder(cell: str) -> str:
    return "@" + cell


def _perm(q, what: str, thread: str) -> Perm:
    q = Q(q)
    try:
        return Perm(q.numerator, q.denominator)
    except PermissionRangeError:
        raise ViolationEvent("bad-amount", what, thread, f"amount {q} for {what} is outside [0, 1]") from None


class Ledger:
    """Mutable working copy of the ledger used during one step."""

    def __init__(self, entries: tuple) -> None:
        self.held: dict = {}
        for loc, who, amt in entries:
            self.held[(loc, who)] = amt

    def get(self, loc: str, who: str) -> Perm:
        return self.held.get((loc, who), ZERO)

    def move(self, amounts: dict, src: str, dst: str, thread: str, line: int) -> list:
        notes = []
        for loc in sorted(amounts):
            amt = amounts[loc]
            if amt.is_zero():
                continue
            have = self.get(loc, src)
            if have < amt:
                raise ViolationEvent("missing-permission", loc, thread,
                                     f"{src} must hand over {amt} of {loc} but holds {have}", line)
            self.held[(loc, src)] = frac_cutoff_sub(have, amt)
            try:
                self.held[(loc, dst)] = frac_add(self.get(loc, dst), amt)
            except PermissionOverflow:
                raise ViolationEvent("permission-sum", loc, thread,
                                     f"{dst} would hold more than 1 of {loc}", line) from None
            notes.append(f"{loc} {amt} {src} -> {dst}")
        return notes

    def check_sums(self, thread: str, line: int) -> None:
        totals: dict = {}
        for (loc, _), amt in sorted(self.held.items()):
            try:
                totals[loc] = frac_add(totals.get(loc, ZERO), amt)
            except PermissionOverflow:
                raise ViolationEvent("permission-sum", loc, thread,
                                     f"permissions to {loc} sum to more than 1", line) from None

    def freeze(self) -> tuple:
        return tuple(sorted((loc, who, amt) for (loc, who), amt in self.held.items() if not amt.is_zero()))


def ledger_snapshot(state: MachineState) -> dict:
    out: dict = {}
    for loc, who, amt in state.ledger:
        out.setdefault(loc, {})[who] = str(amt)
    return out


class Machine:
    """Interpreter for one harness of a resolved program."""

    def __init__(self, program: A.Program, harness: A.HarnessDecl, loop_cap: int = 4) -> None:
        cls = program.cls(harness.cls)
        if cls is None:
            raise OracleError(f"harness {harness.name} names unknown class {harness.cls}")
        self.cls = cls
        self.harness = harness
        self.loop_cap = loop_cap
        self.bindings = dict(harness.bindings)
        self.names = [t.name for t in harness.threads]
        self.roles = {t.name: t.role for t in harness.threads}
        self.role_names = set(cls.roles) | {SYNC_ROLE}
        self.nodes: list = []
        self.ids: dict = {}
        for c in self.cls.methods:
            self._index(c.body)
        for t in harness.threads:
            for a in t.actions:
                self._index(a)

    # -- node table ------------------------------------------------------------

    def _index(self, node) -> int:
        key = id(node)
        if key not in self.ids:
            self.ids[key] = len(self.nodes)
            self.nodes.append(node)
            for sub in _sub_statements(node):
                self._index(sub)
        return self.ids[key]

    def item(self, node) -> tuple:
        return ("s", self.ids[id(node)])

    # -- setup -------------------------------------------------------------------

    def initial(self) -> MachineState:
        ledger = Ledger(())
        for loc in self.harness.locations:
            ledger.held[(loc, MAIN)] = ONE
        for f in self.cls.fields:
            if not f.final and not f.ghost and f.type in ("int", "boolean"):
                ledger.held[(f.name, MAIN)] = ONE
        state = MachineState((), (), (), ledger.freeze())
        ctor = next((m for m in self.cls.methods if m.constructor), None)
        if ctor is not None:
            args = [self.eval(a, {}, state) for a in self.harness.ctor_args]
            if len(args) != len(ctor.params):
                raise OracleError(f"constructor expects {len(ctor.params)} arguments")
            store = tuple(sorted((p.name, v) for p, v in zip(ctor.params, args)))
            stack = tuple(reversed([self.item(s) for s in ctor.body.stmts]))
            state = replace(state, threads=(ThreadState(stack, store, ()),))
            self.names = [MAIN]
            self.roles = {MAIN: SYNC_ROLE}
            try:
                while not state.threads[0].finished:
                    state, _ = self.step(state, 0)
            finally:
                self.names = [t.name for t in self.harness.threads]
                self.roles = {t.name: t.role for t in self.harness.threads}
        ledger = Ledger(state.ledger)
        threads = []
        for t in self.harness.threads:
            for where, expr in t.holds:
                amt = _perm(self.eval(expr, {}, state), where, t.name)
                ledger.move({where: amt}, MAIN, t.name, t.name, t.loc.line)
            stack = tuple(reversed([self.item(a) for a in t.actions]))
            threads.append(ThreadState(stack, (), state.cells))
        return replace(state, threads=tuple(threads), ledger=ledger.freeze())

    # -- expressions ---------------------------------------------------------------

    def eval(self, e, store: dict, state: MachineState, who: str = MAIN, ledger: Ledger | None = None):
        if isinstance(e, A.IntLit):
            return e.value
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.Name):
            if e.id in store:
                return store[e.id]
            if e.id in self.role_names:
                return e.id
            raise OracleError(f"unbound name {e.id}")
        if isinstance(e, A.FieldRef):
            f = self.cls.field(e.name)
            if f is None:
                raise OracleError(f"cannot read {e.name}")
            value = dict(state.fields).get(e.name, 0)
            if not f.final and not f.ghost and ledger is not None:
                if ledger.get(e.name, who).is_zero():
                    raise ViolationEvent("read-without-permission", e.name, who,
                                         f"{who} reads {e.name} holding no permission", e.loc.line)
            return value
        if isinstance(e, A.Unary):
            v = self.eval(e.operand, store, state, who, ledger)
            return (not v) if e.op == "!" else -v
        if isinstance(e, A.Binary):
            op = e.op
            a = self.eval(e.left, store, state, who, ledger)
            if op == "&&":
                return bool(a) and bool(self.eval(e.right, store, state, who, ledger))
            if op == "||":
                return bool(a) or bool(self.eval(e.right, store, state, who, ledger))
            if op == "==>":
                return (not a) or bool(self.eval(e.right, store, state, who, ledger))
            b = self.eval(e.right, store, state, who, ledger)
            if op == "/":
                return Q(a) / Q(b) if b != 0 else Q(0)
            if op == "%":
                return a % b if b != 0 else 0
            return _ARITH[op](a, b)
        if isinstance(e, A.Cond):
            t = self.eval(e.test, store, state, who, ledger)
            return self.eval(e.then if t else e.orelse, store, state, who, ledger)
        if isinstance(e, A.Call) and e.recv is None:
            return self.call(e.name, [self.eval(a, store, state, who, ledger) for a in e.args], state)
        raise OracleError(f"cannot evaluate {type(e).__name__}")

    def call(self, name: str, args: list, state: MachineState):
        f = self.cls.function(name)
        if f is None or len(f.body) != 1 or not isinstance(f.body[0], A.Return):
            raise OracleError(f"{name} is not a pure function")
        env = {p.name: a for p, a in zip(f.params, args)}
        return self.eval(f.body[0].value, env, state)

    # -- protocol amounts ------------------------------------------------------------

    def share(self, cell: str, role: str, value: int, state: MachineState) -> Q:
        a = self.cls.atomic(cell)
        return Q(self.call(a.share, [role, value], state))

    def amounts(self, cell: str, scale, state: MachineState, thread: str) -> dict:
        """Locations and fractions making up ``inv(scale)`` of ``cell``."""
        a = self.cls.atomic(cell)
        acc: dict = {}
        self._resource(A.PredInstance(A.This(), a.inv, (A.Name("$scale"),)), {"$scale": Q(scale)}, state, acc)
        return {loc: _perm(q, loc, thread) for loc, q in acc.items() if q != 0}

    def _resource(self, r, env: dict, state: MachineState, acc: dict) -> None:
        if isinstance(r, (A.Emp, A.Pure)):
            return
        if isinstance(r, A.SepConj):
            self._resource(r.left, env, state, acc)
            self._resource(r.right, env, state, acc)
        elif isinstance(r, A.Implies):
            if self.eval(r.cond, env, state):
                self._resource(r.body, env, state, acc)
        elif isinstance(r, A.PointsTo):
            if not isinstance(r.target, A.FieldRef):
                raise OracleError("unsupported points-to target")
            acc[r.target.name] = acc.get(r.target.name, Q(0)) + Q(self.eval(r.perm, env, state))
        elif isinstance(r, A.PredInstance):
            if r.name == HANDLE:
                return
            args = [self.eval(x, env, state) for x in r.args]
            if r.name in self.bindings:
                loc = self.bindings[r.name]
                acc[loc] = acc.get(loc, Q(0)) + Q(args[-1])
                return
            p = self.cls.predicate(r.name)
            if p is None or p.body is None:
                raise OracleError(f"predicate {r.name} has no concrete meaning in this harness")
            self._resource(p.body, {q.name: v for q, v in zip(p.params, args)}, state, acc)
        else:
            raise OracleError(f"unsupported resource {type(r).__name__}")

    # -- stepping ----------------------------------------------------------------------

    def enabled(self, state: MachineState) -> list:
        return [i for i, t in enumerate(state.threads) if not t.finished]

    def step(self, state: MachineState, index: int) -> tuple:
        """Run thread ``index`` up to and including its next visible action.

        Returns the successor state and a list of human-readable events.
        Raises ``ViolationEvent`` or ``LoopCapExceeded``.
        """
        who = self.names[index]
        th = state.threads[index]
        stack = list(th.stack)
        store = dict(th.store)
        views = dict(th.views)
        cells = dict(state.cells)
        fields = dict(state.fields)
        ledger = Ledger(state.ledger)
        events: list = []

        def cur_state():
            return replace(state, fields=tuple(sorted(fields.items())))

        def ev(e):
            return self.eval(e, store, cur_state(), who, ledger)

        visible = False
        while stack and not visible:
            item = stack.pop()
            tag = item[0]
            if tag == "ret":
                store = dict(item[1])
                continue
            if tag == "loop":
                node = self.nodes[item[1]]
                if ev(node.cond):
                    if item[2] >= self.loop_cap:
                        raise LoopCapExceeded(f"{who}: loop at line {node.loc.line}")
                    stack.append(("loop", item[1], item[2] + 1))
                    stack.extend(reversed([self.item(s) for s in node.body.stmts]))
                continue
            s = self.nodes[item[1]]
            line = s.loc.line
            if isinstance(s, (A.Fold, A.Unfold, A.GhostSet, A.Assert)):
                continue
            if isinstance(s, A.VarDecl):
                if not s.ghost:
                    store[s.name] = ev(s.init) if s.init is not None else _default(s.type)
            elif isinstance(s, A.Assign):
                value = ev(s.value)
                if isinstance(s.target, A.Name):
                    store[s.target.id] = value
                else:
                    f = self.cls.field(s.target.name)
                    if f is None or f.ghost:
                        continue
                    if not f.final:
                        if ledger.get(f.name, who) != ONE:
                            raise ViolationEvent("write-without-permission", f.name, who,
                                                 f"{who} writes {f.name} holding {ledger.get(f.name, who)}", line)
                        visible = True
                    fields[f.name] = value
            elif isinstance(s, A.Block):
                stack.extend(reversed([self.item(x) for x in s.stmts]))
            elif isinstance(s, A.If):
                branch = s.then if ev(s.cond) else s.orelse
                if branch is not None:
                    stack.extend(reversed([self.item(x) for x in branch.stmts]))
            elif isinstance(s, A.While):
                stack.append(("loop", item[1], 0))
            elif isinstance(s, A.Return):
                while stack and stack[-1][0] != "ret":
                    stack.pop()
            elif isinstance(s, (A.MethodCall, A.Invoke)):
                name = s.name if isinstance(s, A.MethodCall) else s.method
                m = self.cls.method(name)
                if m is None:
                    raise OracleError(f"unknown method {name}")
                args = [ev(a) for a in s.args]
                stack.append(("ret", tuple(sorted(store.items()))))
                stack.extend(reversed([self.item(x) for x in m.body.stmts]))
                store = {p.name: v for p, v in zip(m.params, args)}
                events.append(f"{who}: call {name}")
            elif isinstance(s, A.Access):
                have = ledger.get(s.location, who)
                if s.kind == "write" and have != ONE:
                    raise ViolationEvent("write-without-permission", s.location, who,
                                         f"{who} writes {s.location} holding {have}", line)
                if s.kind == "read" and have.is_zero():
                    raise ViolationEvent("read-without-permission", s.location, who,
                                         f"{who} reads {s.location} holding no permission", line)
                events.append(f"{who}: {s.kind} {s.location} (holds {have})")
                visible = True
            elif isinstance(s, A.NewAtomic):
                v = ev(s.arg)
                give = self.amounts(s.cell, self.share(s.cell, SYNC_ROLE, v, cur_state()), cur_state(), who)
                notes = ledger.move(give, who, cell_holder(s.cell), who, line)
                cells[s.cell] = v
                events.append(f"{who}: new {s.cell}({v})" + _fmt(notes))
                visible = True
            elif isinstance(s, A.AtomicOp):
                events.append(self._atomic(s, who, store, views, cells, ledger, cur_state()))
                visible = True
            else:
                raise OracleError(f"unsupported statement {type(s).__name__}")
        ledger.check_sums(who, 0)
        new_thread = ThreadState(tuple(stack), tuple(sorted(store.items())), tuple(sorted(views.items())))
        threads = list(state.threads)
        threads[index] = new_thread
        # a fresh cell is visible to every thread from its initial value on
        if len(cells) != len(state.cells):
            for i, t in enumerate(threads):
                vs = dict(t.views)
                for c, v in cells.items():
                    vs.setdefault(c, v)
                threads[i] = replace(t, views=tuple(sorted(vs.items())))
        nxt = MachineState(tuple(threads), tuple(sorted(cells.items())),
                           tuple(sorted(fields.items())), ledger.freeze())
        return nxt, events

    def _atomic(self, s: A.AtomicOp, who: str, store: dict, views: dict, cells: dict,
                ledger: Ledger, state: MachineState) -> str:
        cell = s.cell
        if cell not in cells:
            raise OracleError(f"{cell} used before construction")
        role = self.roles[who]
        line = s.loc.line
        cur = cells[cell]
        seen = views.get(cell, cur)
        sync = cell_holder(cell)
        args = [self.eval(a, store, state, who, ledger) for a in s.args]

        def sh(r, v):
            return self.share(cell, r, v, state)

        def amounts(q):
            return self.amounts(cell, q, state, who)

        if s.op == "get":
            gain, lose = _cut(sh(role, cur), sh(role, seen)), _cut(sh(role, seen), sh(role, cur))
            notes = ledger.move(amounts(lose), who, sync, who, line)
            notes += ledger.move(amounts(gain), sync, who, who, line)
            views[cell] = cur
            result, text = cur, f"{cell}.get() -> {cur}"
        elif s.op == "set":
            (v,) = args
            notes = ledger.move(amounts(sh(SYNC_ROLE, v)), who, sync, who, line)
            notes += ledger.move(amounts(sh(role, seen)), who, sync, who, line)
            cells[cell] = v
            views[cell] = v
            result, text = None, f"{cell}.set({v})"
        else:
            x, n = args
            if cur == x:
                give = _cut(sh(SYNC_ROLE, n), sh(SYNC_ROLE, x))
                take = _cut(sh(SYNC_ROLE, x), sh(SYNC_ROLE, n))
                notes = ledger.move(amounts(give), who, sync, who, line)
                notes += ledger.move(amounts(take), sync, who, who, line)
                cells[cell] = n
                views[cell] = n
                result = True
            else:
                notes, result = [], False
            text = f"{cell}.compareAndSet({x}, {n}) -> {str(result).lower()}"
        if s.target is not None and result is not None:
            store[s.target] = result
        return f"{who}: {text}" + _fmt(notes)


def _cut(a: Q, b: Q) -> Q:
    return max(a - b, Q(0))


def _fmt(notes: list) -> str:
    return ("; " + ", ".join(notes)) if notes else ""


def _default(type_: str):
    return {"boolean": False, "frac": Q(0)}.get(type_, 0)


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _sub_statements(node) -> list:
    if isinstance(node, A.Block):
        return list(node.stmts)
    if isinstance(node, A.If):
        return [node.then] + ([node.orelse] if node.orelse is not None else [])
    if isinstance(node, A.While):
        return [node.body]
    return []
