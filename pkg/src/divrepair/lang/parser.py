"""Lexer, recursive-descent parser and static checks for ``.mini`` sources.

The grammar is documented (EBNF) in ``docs/language.md``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    Assign, Binary, Block, Call, CallStmt, Function, If, Num, Param, Print,
    Program, Read, Return, Stmt, Unary, Var, While, stmt_exprs, walk_block,
    walk_expr,
)

INT_MAX = (1 << 63) - 1

KEYWORDS = {"func", "if", "else", "while", "read", "print", "return", "int", "float"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\|\||&&|==|!=|<=|>=|[-+*/%<>!=(){},;])
    """,
    re.VERBOSE,
)


class MiniLangError(Exception):
    """Base class for source-level errors."""


class ParseError(MiniLangError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class SemanticError(MiniLangError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "float", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# binary operator precedence, lowest first
_LEVELS: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]
PRECEDENCE = {op: i for i, ops in enumerate(_LEVELS) for op in ops}
UNARY_PRECEDENCE = len(_LEVELS)


class _Parser:
    def __init__(self, source: str) -> None:
        self.toks = tokenize(source)
        self.i = 0
        self.next_sid = 1

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text if tok.kind != "eof" else "end of input"
        return ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error("expected identifier")
        self.i += 1
        return t.text

    def sid(self) -> int:
        s = self.next_sid
        self.next_sid += 1
        return s

    # grammar
    def program(self) -> Program:
        funcs = [self.function()]
        while self.tok.kind != "eof":
            funcs.append(self.function())
        return Program(tuple(funcs))

    def function(self) -> Function:
        self.expect("func")
        name = self.ident()
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.i += 1
                params.append(self.param())
        self.expect(")")
        return Function(name, tuple(params), self.block())

    def param(self) -> Param:
        if not (self.at("int") or self.at("float")):
            raise self.error("expected parameter type 'int' or 'float'")
        typ = self.tok.text
        self.i += 1
        return Param(self.ident(), typ)

    def block(self) -> Block:
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.statement())
        self.expect("}")
        return tuple(stmts)

    def statement(self) -> Stmt:
        t = self.tok
        if t.kind == "kw":
            if t.text == "if":
                return self.if_stmt()
            if t.text == "while":
                sid = self.sid()
                self.i += 1
                cond = self.expr()
                return While(sid, cond, self.block())
            if t.text == "read":
                sid = self.sid()
                self.i += 1
                kind = None
                if self.at("int") or self.at("float"):
                    kind = self.tok.text
                    self.i += 1
                name = self.ident()
                self.expect(";")
                return Read(sid, name, kind)
            if t.text == "print":
                sid = self.sid()
                self.i += 1
                e = self.expr()
                self.expect(";")
                return Print(sid, e)
            if t.text == "return":
                sid = self.sid()
                self.i += 1
                e = None if self.at(";") else self.expr()
                self.expect(";")
                return Return(sid, e)
            raise self.error("expected statement")
        if t.kind == "ident":
            sid = self.sid()
            name = self.ident()
            if self.at("="):
                self.i += 1
                e = self.expr()
                self.expect(";")
                return Assign(sid, name, e)
            if self.at("("):
                call = self.call_rest(name)
                self.expect(";")
                return CallStmt(sid, call)
            raise self.error("expected '=' or '(' after identifier")
        raise self.error("expected statement")

    def if_stmt(self) -> If:
        sid = self.sid()
        self.expect("if")
        cond = self.expr()
        then = self.block()
        orelse = None
        if self.at("else"):
            self.i += 1
            if self.at("if"):
                orelse = (self.if_stmt(),)
            else:
                orelse = self.block()
        return If(sid, cond, then, orelse)

    def call_rest(self, name: str) -> Call:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.i += 1
                args.append(self.expr())
        self.expect(")")
        return Call(name, tuple(args))

    def expr(self, level: int = 0):
        if level == UNARY_PRECEDENCE:
            return self.unary()
        left = self.expr(level + 1)
        ops = _LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.i += 1
            left = Binary(op, left, self.expr(level + 1))
        return left

    def unary(self):
        if self.at("-") or self.at("!"):
            op = self.tok.text
            self.i += 1
            return Unary(op, self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            v = int(t.text)
            if v > INT_MAX:
                raise self.error("integer literal out of range", t)
            return Num(v)
        if t.kind == "float":
            self.i += 1
            v = float(t.text)
            if v == float("inf"):
                raise self.error("float literal out of range", t)
            return Num(v)
        if t.kind == "ident":
            self.i += 1
            if self.at("("):
                return self.call_rest(t.text)
            return Var(t.text)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("expected expression")


def parse(source: str, check: bool = True) -> Program:
    """Parse ``source`` into a :class:`Program`; raises ``ParseError`` or ``SemanticError``."""
    program = _Parser(source).program()
    if check:
        validate(program)
    return program


def declared_variables(func: Function) -> set[str]:
    names = {p.name for p in func.params}
    for s in walk_block(func.body):
        if isinstance(s, (Assign, Read)):
            names.add(s.name)
    return names


def validate(program: Program) -> None:
    """Static well-formedness; raises :class:`SemanticError` on the first problem."""
    arity: dict[str, int] = {}
    for f in program.functions:
        if f.name in arity:
            raise SemanticError(f"duplicate function {f.name!r}")
        arity[f.name] = len(f.params)
        if len({p.name for p in f.params}) != len(f.params):
            raise SemanticError(f"duplicate parameter in {f.name!r}")
    if "main" not in arity:
        raise SemanticError("no function named 'main'")
    if arity["main"] != 0:
        raise SemanticError("'main' must take no parameters")

    for f in program.functions:
        names = declared_variables(f)
        for s in walk_block(f.body):
            for e in stmt_exprs(s):
                for sub in walk_expr(e):
                    if isinstance(sub, Var) and sub.name not in names:
                        raise SemanticError(f"undeclared variable {sub.name!r} in {f.name!r}")
                    if isinstance(sub, Call):
                        if sub.name not in arity:
                            raise SemanticError(f"call to undefined function {sub.name!r}")
                        if arity[sub.name] != len(sub.args):
                            raise SemanticError(
                                f"{sub.name!r} expects {arity[sub.name]} arguments, got {len(sub.args)}"
                            )


def is_valid(program: Program) -> bool:
    try:
        validate(program)
    except SemanticError:
        return False
    return True
