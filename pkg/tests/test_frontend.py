import pytest

from svl.frontend import ParseError, ResolveError, parse, pretty, wellformed
from svl.frontend import ast as A
from svl.frontend.lexer import tokenize

from conftest import MUTATIONS, PROGRAMS, load

SPIN = (PROGRAMS[2]).read_text()


@pytest.mark.parametrize("path", PROGRAMS + MUTATIONS, ids=lambda p: p.stem)
def test_corpus_parses_and_is_wellformed(path):
    prog = load(path)
    assert prog.classes
    assert wellformed(prog) == []


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_pretty_round_trip(path):
    prog = load(path)
    again = parse(pretty(prog))
    assert again == prog
    assert pretty(again) == pretty(prog)


def test_semaphore_structure(corpus_programs):
    cls = corpus_programs["semaphore"].classes[0]
    assert cls.name == "Semaphore"
    assert [m.name for m in cls.methods] == ["Semaphore", "acquire", "release"]
    assert cls.roles == ("T",)
    cell = cls.atomic("sync")
    assert (cell.inv, cell.share, cell.trans) == ("inv", "share", "trans")
    assert cls.predicate("inv").group and cls.predicate("rinv").group
    acquire = cls.method("acquire")
    loop = next(s for s in acquire.body.stmts if isinstance(s, A.While))
    assert len(loop.invariants) == 2
    cas = [s for s in loop.body.stmts if isinstance(s, A.If)][0].then.stmts[2]
    assert isinstance(cas, A.AtomicOp) and cas.op == "compareAndSet"
    assert dict(cas.ghost_args).keys() == {"r", "p"}


def test_harness_is_parsed(corpus_programs):
    hs = corpus_programs["semaphore"].harnesses
    assert [h.name for h in hs] == ["mutex", "readers"]
    h = hs[0]
    assert h.cls == "Semaphore" and h.locations == ("data",) and h.bindings == (("rinv", "data"),)
    assert [t.name for t in h.threads] == ["t1", "t2"]
    assert isinstance(h.threads[0].actions[1], A.Access)
    latch = corpus_programs["countdownlatch"].harnesses[0]
    assert latch.threads[0].holds[0][0] == "data"


def test_locations_are_reported():
    with pytest.raises(ParseError) as exc:
        parse("public class X {\n  void f() { int x = ; }\n}")
    assert exc.value.loc.line == 2


def test_comments_and_annotations_tokenize():
    kinds = [t.text for t in tokenize("// hi\nint /* c */ x; /*@ fold p(1); @*/")]
    assert "fold" in kinds and "hi" not in kinds and "c" not in kinds


@pytest.mark.parametrize("src,needle", [
    (SPIN.replace("c = sync.get()", "q = sync.get()"), "undeclared name"),
    (SPIN.replace("fold locked(p);", "fold lockd(p);"), "lockd"),
    (SPIN.replace("requires locked(p) ** rinv(1);", "requires locked(?p) ** rinv(1);"), "binder"),
    (SPIN.replace("<roles, inv, share, trans, 1> @*/ sync;", "<roles, inv, shar, trans, 1> @*/ sync;"),
     "not declared"),
], ids=["name", "predicate", "binder", "protocol"])
def test_resolution_errors(src, needle):
    with pytest.raises(ResolveError) as exc:
        parse(src)
    assert needle in str(exc.value)


def test_resolve_error_is_parse_error():
    assert issubclass(ResolveError, ParseError)


@pytest.mark.parametrize("src,needle", [
    (SPIN.replace("fold locked(p);", "fold locked(p, p);"), "expects 1 arguments"),
    (SPIN.replace("sync.set(0) /*@ with {r = T, d = 1, p = p} @*/", "sync.set(0) /*@ with {r = T, p = p} @*/"),
     "'with' clause"),
    (SPIN.replace("int c = 0;", "int c = 1 / 2;"), "fractional value"),
    (SPIN.replace("new();", "new(3);"), "constructor expects 0 arguments"),
], ids=["arity", "with", "int-type", "harness"])
def test_wellformedness_diagnostics(src, needle):
    diags = wellformed(parse(src))
    assert any(needle in d.message for d in diags), diags


def test_unterminated_comment():
    with pytest.raises(ParseError):
        parse("public class X { /*@ ghost int y; ")
