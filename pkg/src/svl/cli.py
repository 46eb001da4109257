"""Command-line driver: ``svl verify | oracle | check-syntax``."""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from .engine import to_json, verify_program
from .frontend import ParseError, parse, wellformed
from .oracle import (
    DEFAULT_LOOP_CAP, DEFAULT_MAX_STATES, DEFAULT_MAX_STEPS, OracleError,
    ScheduleInfeasible, explore, replay,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("bound must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="svl", description="Static verifier and interleaving oracle for SVL programs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="{verify,oracle,check-syntax}")

    def common(sp):
        sp.add_argument("files", nargs="+", metavar="FILE")
        sp.add_argument("--json", action="store_true", help="write a structured report to stdout")
        sp.add_argument("--verbose", "-v", action="store_true", help="show warnings and timing")

    v = sub.add_parser("verify", help="verify every method of the given files")
    common(v)
    v.add_argument("--obligations", action="store_true", help="list every obligation, not just failures")

    o = sub.add_parser("oracle", help="explore all interleavings of the harnesses in the given files")
    common(o)
    o.add_argument("--harness", help="only run the harness with this name")
    o.add_argument("--max-steps", type=_positive, default=DEFAULT_MAX_STEPS, metavar="K")
    o.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES, metavar="K")
    o.add_argument("--loop-cap", type=_positive, default=DEFAULT_LOOP_CAP, metavar="K")
    o.add_argument("--strict-bounds", action="store_true",
                   help="exit 3 when exploration was cut short by any bound")
    o.add_argument("--replay", metavar="SCHEDULE",
                   help="replay a comma-separated thread schedule instead of exploring")

    c = sub.add_parser("check-syntax", help="parse and check well-formedness only")
    common(c)
    return p


def _load(path: str):
    """Parse and check a file; returns (program, error message or None)."""
    try:
        with open(path, encoding="utf-8") as fh:
            src = fh.read()
    except OSError as exc:
        return None, f"{path}: {exc.strerror or exc}"
    try:
        prog = parse(src)
    except ParseError as exc:
        return None, f"{path}:{exc}"
    diags = wellformed(prog)
    if diags:
        return None, "\n".join(f"{path}:{d}" for d in diags)
    return prog, None


def _verify(args, out) -> int:
    reports, code = [], EXIT_OK
    for path in args.files:
        prog, err = _load(path)
        if err:
            print(err, file=sys.stderr)
            code = EXIT_INPUT
            continue
        rep = verify_program(prog, path)
        reports.append(rep)
        if not rep.passed and code == EXIT_OK:
            code = EXIT_FAIL
        if args.json:
            continue
        print(f"{path}: {rep.summary()}" + (f" ({rep.seconds:.2f}s)" if args.verbose else ""), file=out)
        for m in rep.methods:
            shown = m.obligations if args.obligations else m.failures
            if args.verbose or shown:
                verdict = "pass" if m.passed else "FAIL"
                extra = f" ({m.seconds:.2f}s)" if args.verbose else ""
                print(f"  {m.cls}.{m.method}: {verdict}{extra}", file=out)
            for o in shown:
                line = f"    {path}:{o.line}:{o.col}: {o.kind} {o.verdict}: {o.description}"
                if o.detail:
                    line += f"\n      {o.detail}"
                print(line, file=out)
            if args.verbose:
                for w in m.warnings:
                    print(f"    warning: {w}", file=out)
    if args.json:
        out.write(to_json(reports))
    return code


def _oracle(args, out) -> int:
    results, code, incomplete = [], EXIT_OK, False
    for path in args.files:
        prog, err = _load(path)
        if err:
            print(err, file=sys.stderr)
            code = EXIT_INPUT
            continue
        harnesses = [h for h in prog.harnesses if args.harness in (None, h.name)]
        if not harnesses:
            print(f"{path}: no harness" + (f" named {args.harness}" if args.harness else ""), file=sys.stderr)
            code = EXIT_INPUT
            continue
        if args.replay is not None:
            if len(harnesses) != 1:
                print(f"{path}: --replay needs --harness when the file has several harnesses", file=sys.stderr)
                return EXIT_INPUT
            schedule = [s.strip() for s in args.replay.split(",") if s.strip()]
            try:
                trace = replay(prog, harnesses[0], schedule, args.loop_cap)
            except ScheduleInfeasible as exc:
                print(f"{path}: schedule infeasible: {exc}", file=sys.stderr)
                return EXIT_FAIL
            print(trace.render(), file=out)
            return EXIT_FAIL if trace.violation else EXIT_OK
        for h in harnesses:
            r = explore(prog, h, max_steps=args.max_steps, max_states=args.max_states,
                        loop_cap=args.loop_cap, file=path)
            results.append(r)
            if r.status == "violation" and code == EXIT_OK:
                code = EXIT_FAIL
            if r.status == "bound-exceeded" or r.pruned:
                incomplete = True
            if not args.json:
                line = f"{path}: {r.summary()}"
                if args.verbose:
                    line += f" ({r.seconds:.2f}s)"
                print(line, file=out)
                if r.violation is not None:
                    print("  schedule: " + ",".join(r.violation.schedule), file=out)
    if args.json:
        status = "violation" if any(r.status == "violation" for r in results) else (
            "bound-exceeded" if any(r.status == "bound-exceeded" for r in results) else "clean")
        doc = {"status": status, "results": [r.to_dict() for r in results]}
        out.write(json.dumps(doc, indent=2) + "\n")
    if code == EXIT_OK and incomplete and args.strict_bounds:
        return EXIT_INTERNAL
    return code


def _check(args, out) -> int:
    code = EXIT_OK
    for path in args.files:
        prog, err = _load(path)
        if err:
            print(err, file=sys.stderr)
            code = EXIT_INPUT
            if args.json:
                out.write(json.dumps({"file": path, "ok": False, "errors": err.splitlines()}) + "\n")
        elif args.json:
            out.write(json.dumps({"file": path, "ok": True, "errors": []}) + "\n")
        else:
            n = sum(len(c.methods) for c in prog.classes)
            print(f"{path}: ok ({len(prog.classes)} class, {n} methods, {len(prog.harnesses)} harnesses)",
                  file=out)
    return code


def main(argv: list | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    run = {"verify": _verify, "oracle": _oracle, "check-syntax": _check}[args.command]
    try:
        return run(args, sys.stdout)
    except OracleError as exc:
        print(f"svl: oracle cannot run this input: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001 - last-resort guard, reported as internal error
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
