import json
import subprocess
import sys

import pytest

from svl.cli import main

from conftest import CORPUS, PROGRAMS, ROOT

SEM = str(CORPUS / "semaphore.svl")
SPIN = str(CORPUS / "spinlock.svl")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_semaphore(capsys):
    code, out, _ = run(capsys, "verify", SEM)
    assert code == 0
    assert "3 methods," in out and "obligations, all passed" in out


def test_verify_mutation_reports_location(capsys):
    path = str(CORPUS / "mutations" / "release-no-fold.svl")
    code, out, _ = run(capsys, "verify", path)
    assert code == 1
    assert f"{path}:83:" in out and "precondition fail" in out


def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "usage" in err
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["oracle", SEM, "--max-states", "-4"])
    assert exc.value.code == 2


def test_parse_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.svl"
    bad.write_text("public class X { void f( }")
    code, _, err = run(capsys, "verify", str(bad))
    assert code == 2 and "bad.svl:1:" in err
    code, _, _ = run(capsys, "check-syntax", str(bad))
    assert code == 2


def test_wellformedness_error_exit(capsys, tmp_path):
    src = (CORPUS / "spinlock.svl").read_text().replace("fold locked(p);", "fold locked(p, p);")
    f = tmp_path / "arity.svl"
    f.write_text(src)
    code, _, err = run(capsys, "verify", str(f))
    assert code == 2 and "expects 1 arguments" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "verify", "/nonexistent.svl")
    assert code == 2 and "nonexistent" in err


def test_json_is_byte_identical(capsys):
    paths = [str(p) for p in PROGRAMS]
    _, a, _ = run(capsys, "verify", "--json", *paths)
    _, b, _ = run(capsys, "verify", "--json", *paths)
    assert a == b
    doc = json.loads(a)
    assert [f["file"] for f in doc["files"]] == paths


def test_text_and_json_agree(capsys):
    path = str(CORPUS / "mutations" / "semaphore-missing-invariant.svl")
    _, text, _ = run(capsys, "verify", "--obligations", path)
    _, js, _ = run(capsys, "verify", "--json", path)
    doc = json.loads(js)
    for m in doc["files"][0]["methods"]:
        for o in m["obligations"]:
            assert f":{o['line']}:{o['col']}: {o['kind']} {o['verdict']}: {o['description']}" in text


def test_oracle_exit_codes(capsys):
    code, out, _ = run(capsys, "oracle", SPIN, "--harness", "mutex")
    assert code == 0 and "clean" in out
    code, _, _ = run(capsys, "oracle", SPIN, "--harness", "mutex", "--strict-bounds")
    assert code == 3  # loop-cap pruning counts as an exceeded bound
    code, out, _ = run(capsys, "oracle", SEM, "--harness", "readers", "--max-states", "10", "--strict-bounds")
    assert code == 3 and "bound-exceeded" in out
    bad = str(CORPUS / "mutations" / "spinlock-ignore-cas.svl")
    code, out, _ = run(capsys, "oracle", bad, "--harness", "mutex")
    assert code == 1 and "schedule:" in out


def test_oracle_replay(capsys):
    bad = str(CORPUS / "mutations" / "spinlock-ignore-cas.svl")
    _, js, _ = run(capsys, "oracle", bad, "--harness", "mutex", "--json")
    schedule = json.loads(js)["results"][0]["violation"]["schedule"]
    code, out, _ = run(capsys, "oracle", bad, "--harness", "mutex", "--replay", ",".join(schedule))
    assert code == 1 and "VIOLATION" in out
    code, _, err = run(capsys, "oracle", bad, "--harness", "mutex", "--replay", "zz")
    assert code == 1 and "infeasible" in err


def test_check_syntax(capsys):
    code, out, _ = run(capsys, "check-syntax", *[str(p) for p in PROGRAMS])
    assert code == 0 and out.count(": ok") == 3


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "svl.cli", "verify", SPIN], capture_output=True, text=True, cwd=ROOT)
    assert proc.returncode == 0, proc.stderr
    assert "all passed" in proc.stdout
