from dataclasses import replace

import pytest

from svl.oracle import BoundExceeded, Machine, ScheduleInfeasible, explore, replay

from conftest import CORPUS, MUTATIONS, PROGRAMS, expectation, load


def harnesses(path):
    prog = load(path)
    return [(prog, h) for h in prog.harnesses]


@pytest.mark.parametrize("prog,h", [ph for p in PROGRAMS for ph in harnesses(p)],
                         ids=lambda x: getattr(x, "name", ""))
def test_corpus_harnesses_are_clean(prog, h):
    r = explore(prog, h)
    assert r.status == "clean", r.summary()
    assert r.states > 1 and r.transitions >= r.states - 1


@pytest.mark.parametrize("path", [p for p in MUTATIONS if expectation(p)[2]], ids=lambda p: p.stem)
def test_race_mutations_violate_and_replay(path):
    prog = load(path)
    [h] = [h for h in prog.harnesses if h.name == expectation(path)[2]]
    r = explore(prog, h)
    assert r.status == "violation"
    v = r.violation
    trace = replay(prog, h, v.schedule)
    assert trace.violation is not None
    assert (trace.violation.kind, trace.violation.location) == (v.kind, v.location)
    assert "VIOLATION" in trace.render().splitlines()[-1] or "ledger" in trace.render().splitlines()[-1]


def test_get_then_set_semaphore_is_caught():
    prog = load(CORPUS / "mutations" / "semaphore-get-then-set.svl")
    r = explore(prog, prog.harnesses[0])
    assert r.violation.kind in ("write-without-permission", "missing-permission")
    assert r.violation.location == "data"


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_single_thread_is_clean(path):
    prog = load(path)
    for h in prog.harnesses:
        for t in h.threads:
            solo = replace(h, threads=(t,))
            assert explore(prog, solo).clean


def test_exploration_is_deterministic():
    prog = load(PROGRAMS[0])
    a = explore(prog, prog.harnesses[0])
    b = explore(prog, prog.harnesses[0])
    assert a.to_dict() == b.to_dict()
    bad = load(CORPUS / "mutations" / "spinlock-ignore-cas.svl")
    assert explore(bad, bad.harnesses[0]).to_dict() == explore(bad, bad.harnesses[0]).to_dict()


def test_empty_schedule_replays_initial_state():
    prog = load(PROGRAMS[0])
    trace = replay(prog, prog.harnesses[0], [])
    assert trace.violation is None
    assert trace.steps == ["initial: data: @sync=1"]


def test_infeasible_schedules():
    prog = load(PROGRAMS[2])
    h = prog.harnesses[0]
    with pytest.raises(ScheduleInfeasible):
        replay(prog, h, ["nobody"])
    with pytest.raises(ScheduleInfeasible):
        replay(prog, h, ["t1"] * 50)


def test_ledger_follows_the_contract():
    prog = load(PROGRAMS[0])
    trace = replay(prog, prog.harnesses[0], ["t1", "t1"])
    assert any("data 1 @sync -> t1" in s for s in trace.steps)


def test_state_bound_is_reported_distinctly():
    prog = load(PROGRAMS[0])
    r = explore(prog, prog.harnesses[1], max_states=50)
    assert r.status == "bound-exceeded" and not r.clean
    with pytest.raises(BoundExceeded):
        explore(prog, prog.harnesses[1], max_states=50, strict=True)
    assert explore(prog, prog.harnesses[0], max_steps=3).status == "bound-exceeded"


def test_loop_cap_prunes():
    prog = load(PROGRAMS[2])
    small = explore(prog, prog.harnesses[0], loop_cap=1)
    big = explore(prog, prog.harnesses[0], loop_cap=4)
    assert small.clean and big.clean
    assert small.states < big.states and small.pruned > 0


def test_bad_bounds_rejected():
    prog = load(PROGRAMS[0])
    with pytest.raises(ValueError):
        explore(prog, prog.harnesses[0], max_states=0)


def test_initial_state_holds_harness_permissions():
    prog = load(PROGRAMS[1])
    m = Machine(prog, prog.harnesses[0])
    s = m.initial()
    assert {(loc, who): str(a) for loc, who, a in s.ledger} == {("data", "a1"): "1/2", ("data", "a2"): "1/2"}
