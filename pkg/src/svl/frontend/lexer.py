"""Tokenizer for SVL.

Annotation delimiters ``/*@`` and ``@*/`` are transparent: their contents
are tokenized like ordinary source, so ghost code may appear anywhere the
grammar allows it.  Plain ``//`` and ``/* */`` comments are skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Loc


class ParseError(Exception):
    def __init__(self, message: str, loc: Loc | None = None) -> None:
        self.message = message
        self.loc = loc
        where = f"{loc.line}:{loc.col}: " if loc is not None else ""
        super().__init__(f"{where}{message}")


KEYWORDS = frozenset({
    "class", "given", "group", "resource", "ghost", "final", "private",
    "public", "protected", "static", "volatile", "void", "int", "boolean",
    "frac", "role", "if", "else", "while", "requires", "ensures",
    "loop_invariant", "fold", "unfold", "assert", "new", "true", "false",
    "this", "return", "with", "harness", "thread", "as", "holds", "location",
    "read", "write", "for",
})

# longest operators first
_OPS = [
    "\\forall*", "==>", "**", "==", "!=", "<=", ">=", "&&", "||", "->",
    "<", ">", "+", "-", "*", "/", "%", "!", "=", "(", ")", "{", "}", ",",
    ";", ".", "?", ":",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<annot_open>/\*@)"
    r"|(?P<annot_close>@\*/)"
    r"|(?P<line_comment>//[^\n]*)"
    r"|(?P<block_comment>/\*.*?\*/)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + r")",
    re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "kw" | "op" | "eof"
    text: str
    loc: Loc
    ghost: bool = False

    def is_(self, text: str) -> bool:
        return self.kind in ("kw", "op") and self.text == text


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    depth = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        loc = Loc(line, pos - line_start + 1)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        if kind == "annot_open":
            if depth:
                raise ParseError("nested annotation", loc)
            depth = 1
        elif kind == "annot_close":
            if not depth:
                raise ParseError("unmatched '@*/'", loc)
            depth = 0
        elif kind == "block_comment" and text.startswith("/*@"):
            pass  # unreachable: annot_open matches first
        elif kind == "int":
            tokens.append(Token("int", text, loc, bool(depth)))
        elif kind == "ident":
            tk = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(tk, text, loc, bool(depth)))
        elif kind == "op":
            tokens.append(Token("op", text, loc, bool(depth)))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    if depth:
        raise ParseError("unterminated annotation", Loc(line, pos - line_start + 1))
    tokens.append(Token("eof", "", Loc(line, pos - line_start + 1)))
    return tokens
