"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in pytest's terminal summary (see ``conftest.py``) and
when this file is run directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time
from fractions import Fraction as Q

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import CORPUS, MUTATIONS, PROGRAMS, ROOT, expectation

# tolerances
MAX_VERIFY_SECONDS = 5.0
MIN_MUTATIONS = 10
MIN_PERMISSION_CASES = 1000
MIN_FRAME_CASES = 500
MIN_OTHER_RACES = 2
MAX_ORACLE_SECONDS = 60.0
ORACLE_MAX_STATES = 100_000
ORACLE_LOOP_CAP = 4

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, text: str) -> None:
    RESULTS[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}"
    print(RESULTS[n])
    assert ok, text


def svl(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "svl.cli", *args], capture_output=True, text=True, cwd=ROOT)


def rel(p) -> str:
    return str(p.relative_to(ROOT))


def test_criterion_1_corpus_verdicts():
    notes, ok = [], True
    for p in PROGRAMS:
        start = time.perf_counter()
        proc = svl("verify", "--json", rel(p))
        secs = time.perf_counter() - start
        doc = json.loads(proc.stdout)
        failed = sum(o["verdict"] == "fail" for m in doc["files"][0]["methods"] for o in m["obligations"])
        good = proc.returncode == 0 and failed == 0 and secs < MAX_VERIFY_SECONDS
        ok &= good
        notes.append(f"{p.stem} {'ok' if good else 'FAILED'} ({failed} failed, {secs:.2f}s)")
    record(1, ok, "corpus verifies: " + ", ".join(notes))


def test_criterion_2_resource_arithmetic():
    doc = json.loads(svl("verify", "--json", rel(PROGRAMS[0])).stdout)
    methods = {m["method"]: m for m in doc["files"][0]["methods"]}

    def cas(name):
        return [t for o in methods[name]["obligations"] for t in o.get("transfers", [])
                if t["op"] == "compareAndSet"]

    [acq], [rel_] = cas("acquire"), cas("release")
    ok = (acq["consumed"], acq["produced_success"]) == ("inv(0)", "inv(1/num)") and \
         (rel_["consumed"], rel_["produced_success"]) == ("inv(1/num)", "inv(0)")
    record(2, ok, f"acquire CAS consumes {acq['consumed']} and yields {acq['produced_success']}; "
                  f"release CAS consumes {rel_['consumed']} and yields {rel_['produced_success']}")


def test_criterion_3_mutation_suite():
    bad = []
    for p in MUTATIONS:
        kind, line, _ = expectation(p)
        proc = svl("verify", "--json", rel(p))
        doc = json.loads(proc.stdout)
        hits = [o for m in doc["files"][0]["methods"] for o in m["obligations"]
                if o["verdict"] == "fail" and o["kind"] == kind and o["line"] == line]
        if proc.returncode != 1 or not hits:
            bad.append(p.stem)
    ok = len(MUTATIONS) >= MIN_MUTATIONS and not bad
    record(3, ok, f"{len(MUTATIONS) - len(bad)}/{len(MUTATIONS)} mutations exit 1 at the announced obligation"
                  + (f"; wrong: {', '.join(bad)}" if bad else ""))


def test_criterion_4_permission_properties():
    from svl.permission import Fraction, PermissionOverflow, frac_add, frac_cutoff_sub

    count = {"n": 0}

    @st.composite
    def perm(draw):
        den = draw(st.integers(1, 10**15))
        return Fraction(draw(st.integers(0, den)), den)

    def q(f):
        return Q(f.numerator, f.denominator)

    @settings(max_examples=MIN_PERMISSION_CASES + 200, deadline=None, database=None)
    @given(perm(), perm(), perm())
    def laws(a, b, c):
        x, y = frac_cutoff_sub(a, b), frac_cutoff_sub(b, a)
        assert q(x) + q(y) == abs(q(a) - q(b)) and (x.is_zero() or y.is_zero())
        lo, hi = (a, b) if q(a) <= q(b) else (b, a)
        assert frac_add(lo, frac_cutoff_sub(hi, lo)) == hi
        if q(a) + q(c) > 1:
            with pytest.raises(PermissionOverflow):
                frac_add(a, c)
        else:
            assert q(frac_add(a, c)) == q(a) + q(c)
        count["n"] += 1

    laws()
    ok = count["n"] >= MIN_PERMISSION_CASES
    record(4, ok, f"{count['n']} randomized cases of the complement, split/merge and overflow laws, 0 failures")


def test_criterion_5_frame_property():
    from collections import Counter

    import test_symheap as S

    count = {"n": 0}

    @settings(max_examples=MIN_FRAME_CASES + 100, deadline=None, database=None,
              suppress_health_check=[HealthCheck.too_slow])
    @given(S.heap_and_resource())
    def frame(case):
        symbolic, atoms, parts = case
        vals = {"v_f": S.x, "v_g": S.y}
        whole = S.build(atoms, [a for _, _, a in atoms], symbolic, vals)
        sub = S.build(atoms, [a * t for (_, _, a), t in zip(atoms, parts)], symbolic, vals)
        env = S.Env(vals, {k: ("int" if k.startswith("v_") else "frac") for k in vals})
        start = S.SymbolicHeap().assume(S.T.and_(S.T.cmp(">", S.p, S.T.ZERO), S.T.cmp("<=", S.p, S.T.ONE)))
        (h,) = S.produce(start, whole, env, S.CTX)
        for rest, e in S.consume(h, sub, env, S.CTX):
            (again,) = S.produce(rest, sub, e, S.CTX)
            assert Counter(again.chunks) == Counter(h.chunks)
        count["n"] += 1

    frame()
    ok = count["n"] >= MIN_FRAME_CASES
    record(5, ok, f"{count['n']} randomized heap/resource pairs: consume then produce restores the heap")


def test_criterion_6_oracle_cross_check():
    start = time.perf_counter()
    bounds = ["--max-states", str(ORACLE_MAX_STATES), "--loop-cap", str(ORACLE_LOOP_CAP)]
    clean_notes, problems = [], []
    for p in PROGRAMS:
        proc = svl("oracle", "--json", rel(p), *bounds)
        doc = json.loads(proc.stdout)
        for r in doc["results"]:
            clean_notes.append(f"{p.stem}/{r['harness']} {r['status']} ({r['states']} states)")
            if proc.returncode != 0 or r["status"] != "clean" or r["states"] > ORACLE_MAX_STATES:
                problems.append(f"{p.stem}/{r['harness']}")
    races = [p for p in MUTATIONS if expectation(p)[2]]
    caught = []
    for p in races:
        harness = expectation(p)[2]
        proc = svl("oracle", "--json", rel(p), "--harness", harness, *bounds)
        doc = json.loads(proc.stdout)
        v = doc["results"][0].get("violation")
        if proc.returncode != 1 or v is None:
            problems.append(p.stem)
            continue
        rep = svl("oracle", rel(p), "--harness", harness, "--replay", ",".join(v["schedule"]))
        if rep.returncode != 1 or "VIOLATION" not in rep.stdout:
            problems.append(p.stem + " (replay)")
            continue
        caught.append(p.stem)
    secs = time.perf_counter() - start
    others = [c for c in caught if c != "semaphore-get-then-set"]
    ok = (not problems and "semaphore-get-then-set" in caught and len(others) >= MIN_OTHER_RACES
          and secs < MAX_ORACLE_SECONDS)
    record(6, ok, f"{len(clean_notes)} corpus harnesses clean; violations replayed for {', '.join(caught)}; "
                  f"{secs:.1f}s total" + (f"; problems: {', '.join(problems)}" if problems else ""))


def test_criterion_7_determinism():
    files = [rel(p) for p in PROGRAMS + MUTATIONS]
    a = svl("verify", "--json", *files)
    b = svl("verify", "--json", *files)
    ok = a.stdout == b.stdout and a.stdout.startswith("{")
    record(7, ok, f"two verify --json runs over {len(files)} files are "
                  + ("byte-identical" if a.stdout == b.stdout else "different"))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
