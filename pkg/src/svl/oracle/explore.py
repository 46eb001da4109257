"""Exhaustive interleaving exploration and schedule replay."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..frontend import ast as A
from .machine import LoopCapExceeded, Machine, MachineState, ViolationEvent, ledger_snapshot

DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_STEPS = 10_000
DEFAULT_LOOP_CAP = 4


class BoundExceeded(Exception):
    """Exploration stopped at the state or step bound before finishing."""


class ScheduleInfeasible(Exception):
    """A replayed schedule picks a thread that cannot move."""


@dataclass
class Violation:
    kind: str
    location: str
    thread: str
    message: str
    line: int
    schedule: list
    ledger: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "location": self.location, "thread": self.thread,
                "message": self.message, "line": self.line,
                "schedule": list(self.schedule), "ledger": self.ledger}


@dataclass
class ExplorationResult:
    file: str
    harness: str
    status: str  # "clean" | "violation" | "bound-exceeded"
    states: int = 0
    transitions: int = 0
    pruned: int = 0
    violation: Violation | None = None
    bound: str | None = None
    seconds: float = 0.0

    @property
    def clean(self) -> bool:
        return self.status == "clean"

    def summary(self) -> str:
        head = f"{self.harness}: {self.status}, {self.states} states, {self.transitions} transitions"
        if self.pruned:
            head += f", {self.pruned} branches cut at the loop cap"
        if self.violation is not None:
            v = self.violation
            head += f"; {v.kind} on {v.location} by {v.thread} (line {v.line}): {v.message}"
        if self.bound:
            head += f"; stopped at {self.bound}"
        return head

    def to_dict(self, timing: bool = False) -> dict:
        d = {"file": self.file, "harness": self.harness, "status": self.status,
             "states": self.states, "transitions": self.transitions, "pruned": self.pruned}
        if self.violation is not None:
            d["violation"] = self.violation.to_dict()
        if self.bound:
            d["bound"] = self.bound
        if timing:
            d["seconds"] = round(self.seconds, 3)
        return d


def _violation(machine: Machine, state: MachineState, exc: ViolationEvent, schedule: list) -> Violation:
    return Violation(exc.kind, exc.location, exc.thread, exc.message, exc.line,
                     [machine.names[i] for i in schedule], ledger_snapshot(state))


def explore(program: A.Program, harness: A.HarnessDecl, *, max_steps: int = DEFAULT_MAX_STEPS,
            max_states: int = DEFAULT_MAX_STATES, loop_cap: int = DEFAULT_LOOP_CAP,
            file: str = "<input>", strict: bool = False) -> ExplorationResult:
    """Depth-first search over all interleavings of ``harness``.

    Threads are tried in declaration order, so the visited state set and
    the first violation found are fully determined by the inputs.  With
    ``strict`` set, hitting the state or step bound raises ``BoundExceeded``.
    """
    if max_steps <= 0 or max_states <= 0:
        raise ValueError("bounds must be positive")
    start = time.perf_counter()
    m = Machine(program, harness, loop_cap)
    res = ExplorationResult(file, harness.name, "clean")
    try:
        init = m.initial()
    except ViolationEvent as exc:
        res.status = "violation"
        res.violation = Violation(exc.kind, exc.location, exc.thread, exc.message, exc.line, [], {})
        res.seconds = time.perf_counter() - start
        return res
    visited = {init}
    stack = [(init, ())]
    while stack:
        state, sched = stack.pop()
        succ = []
        for i in m.enabled(state):
            if len(sched) >= max_steps:
                res.bound = f"max-steps {max_steps}"
                break
            try:
                nxt, _ = m.step(state, i)
            except LoopCapExceeded:
                res.pruned += 1
                continue
            except ViolationEvent as exc:
                res.transitions += 1
                res.status = "violation"
                res.violation = _violation(m, state, exc, list(sched) + [i])
                res.states = len(visited)
                res.seconds = time.perf_counter() - start
                return res
            res.transitions += 1
            if nxt in visited:
                continue
            visited.add(nxt)
            if len(visited) > max_states:
                res.bound = f"max-states {max_states}"
                break
            succ.append((nxt, sched + (i,)))
        if res.bound:
            break
        stack.extend(reversed(succ))
    res.states = len(visited)
    if res.bound:
        res.status = "bound-exceeded"
        if strict:
            raise BoundExceeded(res.summary())
    res.seconds = time.perf_counter() - start
    return res


@dataclass
class Trace:
    steps: list = field(default_factory=list)
    violation: Violation | None = None

    def render(self) -> str:
        lines = [f"{i:3}. {s}" for i, s in enumerate(self.steps)]
        if self.violation is not None:
            v = self.violation
            lines.append(f"VIOLATION {v.kind} on {v.location} by {v.thread} (line {v.line}): {v.message}")
            for loc in sorted(v.ledger):
                holders = ", ".join(f"{w}={a}" for w, a in sorted(v.ledger[loc].items()))
                lines.append(f"     ledger {loc}: {holders}")
        return "\n".join(lines)


def replay(program: A.Program, harness: A.HarnessDecl, schedule: list,
           loop_cap: int = DEFAULT_LOOP_CAP) -> Trace:
    """Re-execute ``schedule`` (thread names) step by step."""
    m = Machine(program, harness, loop_cap)
    state = m.initial()
    trace = Trace(["initial: " + _ledger_line(state)])
    done: list = []
    for name in schedule:
        if name not in m.names:
            raise ScheduleInfeasible(f"unknown thread {name}")
        i = m.names.index(name)
        if i not in m.enabled(state):
            raise ScheduleInfeasible(f"thread {name} cannot move after {len(done)} steps")
        try:
            state, events = m.step(state, i)
        except LoopCapExceeded as exc:
            raise ScheduleInfeasible(f"schedule exceeds the loop cap: {exc}") from None
        except ViolationEvent as exc:
            trace.violation = _violation(m, state, exc, [m.names.index(n) for n in done + [name]])
            return trace
        done.append(name)
        trace.steps.extend(events or [f"{name}: local step"])
    return trace


def _ledger_line(state: MachineState) -> str:
    snap = ledger_snapshot(state)
    return "; ".join(f"{loc}: " + ", ".join(f"{w}={a}" for w, a in sorted(h.items()))
                     for loc, h in sorted(snap.items())) or "empty ledger"
