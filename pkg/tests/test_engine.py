import json

import pytest

from svl.engine import KINDS, to_json, verify_program

from conftest import CORPUS, MUTATIONS, PROGRAMS, ROOT, expectation, load

DATA = ROOT / "tests" / "data"


@pytest.fixture(scope="module")
def reports():
    return {p.stem: verify_program(load(p), str(p.relative_to(ROOT))) for p in PROGRAMS}


@pytest.mark.parametrize("stem", [p.stem for p in PROGRAMS])
def test_corpus_verifies(reports, stem):
    rep = reports[stem]
    assert rep.passed, [(o.line, o.kind, o.detail) for m in rep.methods for o in m.failures]
    assert len(rep.methods) == 3
    assert all(not m.warnings for m in rep.methods)
    assert rep.summary().endswith("all passed")


def test_semaphore_summary_line(reports):
    assert reports["semaphore"].summary() == f"3 methods, {reports['semaphore'].obligation_count} obligations, all passed"


def _cas(report, method):
    m = report.method(method)
    [ob] = [o for o in m.obligations if o.transfers and o.transfers[0]["op"] == "compareAndSet"]
    return ob.transfers


def test_acquire_and_release_move_one_permit(reports):
    [acq] = _cas(reports["semaphore"], "acquire")
    assert (acq["consumed"], acq["produced_success"], acq["produced_failure"]) == ("inv(0)", "inv(1/num)", "inv(0)")
    [rel] = _cas(reports["semaphore"], "release")
    assert (rel["consumed"], rel["produced_success"], rel["produced_failure"]) == ("inv(1/num)", "inv(0)", "inv(1/num)")


def test_lock_takes_everything(reports):
    [t] = _cas(reports["spinlock"], "lock")
    assert (t["consumed"], t["produced_success"]) == ("inv(0)", "inv(1)")


def test_latch_count_down_gives_a_share(reports):
    [t] = _cas(reports["countdownlatch"], "countDown")
    assert (t["consumed"], t["produced_success"]) == ("inv(1/count)", "inv(0)")


def test_obligation_kinds_are_known(reports):
    kinds = {o.kind for r in reports.values() for m in r.methods for o in m.obligations}
    assert kinds <= set(KINDS)
    assert {"precondition", "postcondition", "loop-invariant-entry", "loop-invariant-preservation",
            "fold", "unfold"} <= kinds


@pytest.mark.parametrize("path", MUTATIONS, ids=lambda p: p.stem)
def test_mutation_fails_where_announced(path):
    kind, line, _ = expectation(path)
    rep = verify_program(load(path), path.name)
    assert not rep.passed
    failing = {(o.kind, o.line) for m in rep.methods for o in m.failures}
    assert (kind, line) in failing, failing


def test_failures_carry_detail():
    rep = verify_program(load(CORPUS / "mutations" / "release-no-fold.svl"))
    [ob] = rep.method("release").failures
    assert "no chunk provides inv" in ob.detail and "$" not in ob.detail
    assert ob.transfers[0]["consumed"] == "inv(1/num)"


def test_dropping_an_empty_fold_is_harmless():
    # folding inv(0) before a compareAndSet that gives nothing back is a no-op
    src = (CORPUS / "semaphore.svl").read_text()
    i = src.index("public void acquire()")
    fold = "        /*@ fold inv(share(S, nextc) - share(S, c)); @*/\n"
    j = src.index(fold, i)
    from svl.frontend import parse
    rep = verify_program(parse(src[:j] + src[j + len(fold):]))
    assert rep.passed


def test_field_access_and_calls():
    rep = verify_program(load(DATA / "counter.svl"))
    assert rep.method("put").passed and rep.method("twice").passed
    [ob] = rep.method("bad").failures
    assert ob.kind == "heap-access" and "requires permission 1" in ob.detail
    [ob] = rep.method("peek").failures
    assert ob.kind == "pure-assert"
    never = rep.method("never")
    assert never.passed and any("unsatisfiable" in w for w in never.warnings)


def test_json_report_is_deterministic_and_well_shaped(reports):
    a = to_json(list(reports.values()))
    b = to_json([verify_program(load(p), str(p.relative_to(ROOT))) for p in PROGRAMS])
    assert a == b
    doc = json.loads(a)
    assert doc["verdict"] == "pass"
    ob = doc["files"][0]["methods"][0]["obligations"][0]
    assert {"line", "col", "kind", "description", "verdict"} <= ob.keys()
    assert "seconds" not in json.dumps(doc)


def test_obligations_merge_across_paths():
    rep = verify_program(load(PROGRAMS[0]))
    keys = [(o.line, o.col, o.kind, o.description) for m in rep.methods for o in m.obligations]
    assert len(keys) == len(set(keys))
