"""Recursive-descent parser producing an unresolved syntax tree."""

from __future__ import annotations

from .ast import (
    Access, Assert, Assign, AtomicField, AtomicOp, Binary, Binder, Block,
    BoolLit, Call, ClassDecl, Cond, FieldDecl, FieldRef, Fold, ForallStar,
    FunctionDecl, GhostSet, HarnessDecl, If, IntLit, Invoke, Loc, MethodCall,
    MethodDecl, Name, NewAtomic, Param, PredicateDecl, Program, Return, SetLit,
    This, ThreadDecl, Unary, Unfold, VarDecl, While,
)
from .lexer import ParseError, Token, tokenize

ATOMIC_OPS = ("get", "set", "compareAndSet")
BASE_TYPES = ("int", "boolean", "frac", "role", "resource", "void")
MODIFIERS = ("private", "public", "protected", "static", "volatile")

# binary operator precedence, loosest first; "?" (ternary) sits between
_LEVELS = [
    ("**",),
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str) -> None:
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.is_(text)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}",
                             self.tok.loc)
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise ParseError(f"expected identifier, found {self.tok.text or 'end of input'!r}",
                             self.tok.loc)
        return self.advance().text

    def at_ident(self, text: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == text

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        classes, harnesses = [], []
        while self.tok.kind != "eof":
            if self.at("harness"):
                harnesses.append(self.harness())
                continue
            given = []
            while self.at("given"):
                given.extend(self.given_clause())
            while self.tok.text in MODIFIERS and self.tok.kind == "kw":
                self.advance()
            if not self.at("class"):
                raise ParseError(f"expected 'class', found {self.tok.text!r}", self.tok.loc)
            classes.append(self.class_decl(tuple(given)))
        return Program(tuple(classes), tuple(harnesses))

    def given_clause(self) -> list[Param]:
        self.expect("given")
        params = []
        while True:
            loc = self.tok.loc
            group = self.accept("group")
            type_ = self.type_()
            params.append(Param(type_, self.ident(), group, loc))
            if not self.accept(","):
                break
        self.expect(";")
        return params

    def type_(self) -> str:
        t = self.tok
        if t.kind == "kw" and t.text in BASE_TYPES:
            self.advance()
            return t.text
        if self.at("("):
            self.advance()
            args = []
            if not self.at("->"):
                args.append(self.type_())
                while self.accept(","):
                    args.append(self.type_())
            self.expect("->")
            ret = self.type_()
            self.expect(")")
            return "(" + ",".join(args) + "->" + ret + ")"
        if t.kind == "ident":
            self.advance()
            if self.accept("<"):
                inner = [self.type_()]
                while self.accept(","):
                    inner.append(self.type_())
                self.expect(">")
                return f"{t.text}<{','.join(inner)}>"
            return t.text
        raise ParseError(f"expected type, found {t.text!r}", t.loc)

    def at_type(self) -> bool:
        t = self.tok
        if t.kind == "kw" and t.text in BASE_TYPES:
            return True
        if t.kind == "ident" and t.text == "Set" and self.peek().is_("<"):
            return True
        return False

    # -- classes -----------------------------------------------------------

    def class_decl(self, given: tuple) -> ClassDecl:
        loc = self.expect("class").loc
        name = self.ident()
        self.expect("{")
        fields, atomics, preds, funcs, methods = [], [], [], [], []
        pending: dict = {"given": [], "requires": [], "ensures": []}
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError("unterminated class body", self.tok.loc)
            if self.at("given"):
                pending["given"].extend(self.given_clause())
                continue
            if self.at("requires") or self.at("ensures"):
                kind = self.advance().text
                pending[kind].append(self.expr())
                self.expect(";")
                continue
            self.member(name, pending, fields, atomics, preds, funcs, methods)
        self.expect("}")
        if any(pending.values()):
            raise ParseError("method contract not followed by a method", self.tok.loc)
        return ClassDecl(name, given, tuple(fields), tuple(atomics), tuple(preds),
                         tuple(funcs), tuple(methods), loc)

    def member(self, cls_name, pending, fields, atomics, preds, funcs, methods) -> None:
        start = self.tok
        ghost = final = group = False
        while True:
            if self.tok.kind == "kw" and self.tok.text in MODIFIERS:
                self.advance()
            elif self.accept("ghost"):
                ghost = True
            elif self.accept("final"):
                final = True
            elif self.accept("group"):
                group = True
            else:
                break
        loc = start.loc
        # constructor
        if self.at_ident(cls_name) and self.peek().is_("("):
            self.advance()
            params = self.params()
            body = self.block()
            methods.append(self._method(cls_name, "void", params, body, pending, True, loc))
            return
        # atomic cell
        if self.at_ident("AtomicInteger"):
            self.advance()
            self.expect("<")
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident() if self.tok.kind == "ident" else None)
                if names[-1] is None:
                    names[-1] = self.expr_noseq()
            self.expect(">")
            if len(names) not in (4, 5):
                raise ParseError("AtomicInteger takes 4 protocol parameters and an optional bound", loc)
            bound = names[4] if len(names) == 5 else None
            if isinstance(bound, str):
                bound = Name(bound, loc)
            cell = self.ident()
            self.expect(";")
            atomics.append(AtomicField(cell, *names[:4], bound, loc))
            return
        # predicate
        if self.at("resource"):
            self.advance()
            pname = self.ident()
            params = self.params()
            body = None
            if self.accept("="):
                body = self.expr()
            self.expect(";")
            preds.append(PredicateDecl(pname, params, body, group, loc))
            return
        type_ = self.type_()
        name = self.ident()
        if self.at("("):
            params = self.params()
            body = self.block()
            if start.ghost:
                funcs.append(FunctionDecl(type_, name, params, body.stmts, loc))
            else:
                methods.append(self._method(name, type_, params, body, pending, False, loc))
            return
        init = None
        if self.accept("="):
            init = self.expr()
        self.expect(";")
        fields.append(FieldDecl(type_, name, ghost or start.ghost, final, init, loc))

    def _method(self, name, ret, params, body, pending, ctor, loc) -> MethodDecl:
        m = MethodDecl(name, ret, params, tuple(pending["given"]),
                       tuple(pending["requires"]), tuple(pending["ensures"]),
                       body, ctor, loc)
        for v in pending.values():
            v.clear()
        return m

    def params(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                loc = self.tok.loc
                type_ = self.type_()
                out.append(Param(type_, self.ident(), False, loc))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(out)

    # -- statements --------------------------------------------------------

    def block(self) -> Block:
        loc = self.expect("{").loc
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError("unterminated block", self.tok.loc)
            stmts.extend(self.statement())
        self.expect("}")
        return Block(tuple(stmts), loc)

    def as_block(self) -> Block:
        if self.at("{"):
            return self.block()
        loc = self.tok.loc
        return Block(tuple(self.statement()), loc)

    def statement(self) -> list:
        t = self.tok
        loc = t.loc
        if self.at("{"):
            return [self.block()]
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.as_block()
            orelse = self.as_block() if self.accept("else") else None
            return [If(cond, then, orelse, loc)]
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            invs = []
            while self.accept("loop_invariant"):
                invs.append(self.expr())
                self.expect(";")
            if not invs:
                raise ParseError("missing loop invariant", loc)
            return [While(cond, tuple(invs), self.as_block(), loc)]
        if self.at("fold") or self.at("unfold"):
            kind = self.advance().text
            pred = self.postfix()
            if not isinstance(pred, Call):
                raise ParseError(f"{kind} expects a predicate application", loc)
            self.expect(";")
            return [(Fold if kind == "fold" else Unfold)(pred, loc)]
        if self.at_ident("set") and (self.peek().kind == "ident" or self.peek().is_("this")):
            self.advance()
            target = self.postfix()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return [GhostSet(target, value, loc)]
        if self.at("assert"):
            self.advance()
            e = self.expr()
            self.expect(";")
            return [Assert(e, loc)]
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [Return(value, loc)]
        if self.at("ghost") or self.at("final") or self.at_type():
            ghost = False
            while self.at("ghost") or self.at("final"):
                ghost = ghost or self.advance().text == "ghost"
            type_ = self.type_()
            decls = []
            while True:
                dloc = self.tok.loc
                name = self.ident()
                init = self.expr() if self.accept("=") else None
                decls.append(VarDecl(type_, name, init, ghost or t.ghost, dloc))
                if not self.accept(","):
                    break
            self.expect(";")
            return decls
        # assignment or call
        lhs = self.postfix()
        if self.accept("="):
            if self.at("new"):
                if not isinstance(lhs, (Name, FieldRef)):
                    raise ParseError("invalid assignment target", loc)
                stmt = self.new_atomic(_target_name(lhs), loc)
                self.expect(";")
                return [stmt]
            value = self.expr()
            if isinstance(value, Call) and value.name in ATOMIC_OPS and value.recv is not None:
                if not isinstance(lhs, Name):
                    raise ParseError("atomic result must be stored in a local", loc)
                stmt = self.atomic(lhs.id, value, loc)
            else:
                if self.at("with"):
                    raise ParseError("'with' clause only allowed on calls", self.tok.loc)
                stmt = Assign(lhs, value, loc)
            self.expect(";")
            return [stmt]
        if isinstance(lhs, Call) and lhs.recv is not None:
            if lhs.name in ATOMIC_OPS:
                stmt = self.atomic(None, lhs, loc)
            else:
                stmt = MethodCall(lhs.recv, lhs.name, lhs.args, self.with_clause(), loc)
            self.expect(";")
            return [stmt]
        if isinstance(lhs, Call):
            stmt = MethodCall(This(loc), lhs.name, lhs.args, self.with_clause(), loc)
            self.expect(";")
            return [stmt]
        raise ParseError("expected statement", loc)

    def atomic(self, target, call: Call, loc: Loc) -> AtomicOp:
        if not isinstance(call.recv, (Name, FieldRef)):
            raise ParseError("atomic operation on a non-field receiver", loc)
        return AtomicOp(target, _target_name(call.recv), call.name, call.args,
                        self.with_clause(), loc)

    def with_clause(self) -> tuple:
        if not self.accept("with"):
            return ()
        self.expect("{")
        out = []
        if not self.at("}"):
            while True:
                name = self.ident()
                self.expect("=")
                out.append((name, self.expr()))
                if not self.accept(","):
                    break
        self.expect("}")
        return tuple(out)

    def new_atomic(self, cell: str, loc: Loc) -> NewAtomic:
        self.expect("new")
        if not self.at_ident("AtomicInteger"):
            raise ParseError("only AtomicInteger cells can be created", self.tok.loc)
        self.advance()
        params = []
        if self.accept("<"):
            params.append(self.ident())
            while self.accept(","):
                # the optional bound is restated by the field declaration
                e = self.expr_noseq()
                if isinstance(e, Name):
                    params.append(e.id)
            self.expect(">")
        self.expect("(")
        arg = self.expr()
        self.expect(")")
        return NewAtomic(cell, tuple(params), arg, loc)

    # -- harness -----------------------------------------------------------

    def harness(self) -> HarnessDecl:
        loc = self.expect("harness").loc
        name = self.ident()
        self.expect("for")
        cls = self.ident()
        self.expect("{")
        locations, bindings, ctor_args, threads = [], [], None, []
        while not self.at("}"):
            if self.accept("location"):
                locations.append(self.ident())
                while self.accept(","):
                    locations.append(self.ident())
                self.expect(";")
            elif self.at("new"):
                self.advance()
                ctor_args = self.call_args()
                self.expect(";")
            elif self.at("thread"):
                threads.append(self.thread())
            elif self.tok.kind == "ident":
                pred = self.ident()
                self.expect("(")
                self.ident()
                self.expect(")")
                self.expect("=")
                bindings.append((pred, self.ident()))
                self.expect(";")
            else:
                raise ParseError(f"unexpected {self.tok.text!r} in harness", self.tok.loc)
        self.expect("}")
        if ctor_args is None:
            raise ParseError("harness needs a 'new(...)' constructor call", loc)
        return HarnessDecl(name, cls, tuple(locations), tuple(bindings),
                           tuple(ctor_args), tuple(threads), loc)

    def thread(self) -> ThreadDecl:
        loc = self.expect("thread").loc
        name = self.ident()
        self.expect("as")
        role = self.ident()
        holds = []
        if self.accept("holds"):
            while True:
                where = self.ident()
                holds.append((where, self.expr_noseq()))
                if not self.accept(","):
                    break
        self.expect("{")
        actions = []
        while not self.at("}"):
            aloc = self.tok.loc
            if self.at("read") or self.at("write"):
                kind = self.advance().text
                actions.append(Access(kind, self.ident(), aloc))
            else:
                method = self.ident()
                actions.append(Invoke(method, tuple(self.call_args()), aloc))
            self.expect(";")
        self.expect("}")
        return ThreadDecl(name, role, tuple(holds), tuple(actions), loc)

    # -- expressions -------------------------------------------------------

    def expr(self):
        """Full expression; ``==>`` is loosest and right associative."""
        left = self.binary(0)
        if self.at("==>"):
            loc = self.advance().loc
            return Binary("==>", left, self.expr(), loc)
        return left

    def expr_noseq(self):
        """An additive expression; stops before ``,`` ``>`` and ``{``."""
        return self.binary(6)

    def binary(self, level: int):
        # level 0 is **, level 1 the ternary, levels 2.. index _LEVELS
        if level == 1:
            test = self.binary(2)
            if self.at("?"):
                loc = self.advance().loc
                then = self.binary(1)
                self.expect(":")
                return Cond(test, then, self.binary(1), loc)
            return test
        if level > len(_LEVELS):
            return self.unary()
        ops = _LEVELS[0] if level == 0 else _LEVELS[level - 1]
        nxt = 1 if level == 0 else level + 1
        left = self.binary(nxt)
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance()
            left = Binary(op.text, left, self.binary(nxt), op.loc)
        return left

    def unary(self):
        if self.at("!") or self.at("-"):
            op = self.advance()
            return Unary(op.text, self.unary(), op.loc)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            if self.at("."):
                self.advance()
                loc = self.tok.loc
                name = self.ident()
                e = FieldRef(e, name, loc)
            elif self.at("(") and isinstance(e, (Name, FieldRef)):
                args = self.call_args()
                if isinstance(e, Name):
                    e = Call(None, e.id, tuple(args), e.loc)
                else:
                    e = Call(e.obj, e.name, tuple(args), e.loc)
            else:
                return e

    def call_args(self) -> list:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        return args

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), t.loc)
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolLit(t.text == "true", t.loc)
        if self.at("this"):
            self.advance()
            return This(t.loc)
        if t.kind == "ident":
            self.advance()
            return Name(t.text, t.loc)
        if self.at("?"):
            self.advance()
            return Binder(self.ident(), t.loc)
        if self.at("{"):
            self.advance()
            items = []
            if not self.at("}"):
                items.append(self.expr())
                while self.accept(","):
                    items.append(self.expr())
            self.expect("}")
            return SetLit(tuple(items), t.loc)
        if self.at("("):
            self.advance()
            if self.at("\\forall*"):
                self.advance()
                self.type_()
                var = self.ident()
                self.expect(";")
                rng = self.expr()
                self.expect(";")
                body = self.expr()
                self.expect(")")
                return ForallStar(var, rng, body, t.loc)
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.loc)


def _target_name(e) -> str:
    if isinstance(e, Name):
        return e.id
    if isinstance(e, FieldRef) and isinstance(e.obj, This):
        return e.name
    raise ParseError("expected a field of this object", getattr(e, "loc", None))


def parse_syntax(source: str) -> Program:
    """Parse without name resolution."""
    return Parser(source).program()
