"""SVL front end: lexing, parsing, name resolution and well-formedness."""

from __future__ import annotations

from .ast import Program
from .checker import Diagnostic, wellformed
from .lexer import ParseError
from .parser import parse_syntax
from .printer import pretty
from .resolve import ResolveError, resolve_program


def parse(source: str) -> Program:
    """Parse and resolve SVL source text.

    Raises :class:`ParseError` on malformed input and :class:`ResolveError`
    (a subclass) on undeclared or duplicate names.
    """
    return resolve_program(parse_syntax(source))


__all__ = ["Diagnostic", "ParseError", "Program", "ResolveError", "parse",
           "pretty", "wellformed"]
