"""AST node types for the mini-language.

Nodes are frozen dataclasses; a parsed :class:`Program` is never mutated.
Statement nodes carry a ``sid`` (statement id) assigned in source order by
the parser. Edits in :mod:`divrepair.search` address statements by sid.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Union

Value = Union[int, float]


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Unary, Binary, Call]


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    sid: int
    name: str
    expr: Expr


@dataclass(frozen=True)
class If:
    sid: int
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None = None


@dataclass(frozen=True)
class While:
    sid: int
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Read:
    sid: int
    name: str
    kind: str | None = None  # None, "int" or "float"


@dataclass(frozen=True)
class Print:
    sid: int
    expr: Expr


@dataclass(frozen=True)
class Return:
    sid: int
    expr: Expr | None = None


@dataclass(frozen=True)
class CallStmt:
    sid: int
    call: Call


Stmt = Union[Assign, If, While, Read, Print, Return, CallStmt]
Block = tuple[Stmt, ...]

STMT_TYPES = (Assign, If, While, Read, Print, Return, CallStmt)


@dataclass(frozen=True)
class Param:
    name: str
    type: str  # "int" or "float"


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[Param, ...]
    body: Block


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]
    # interpreter/analysis caches; excluded from equality and hashing
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __reduce__(self):
        # compiled closures in the cache cannot be pickled
        return (Program, (self.functions,))

    def function(self, name: str) -> Function | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def statements(self) -> list[Stmt]:
        """All statements in source (pre-)order."""
        out: list[Stmt] = []
        for f in self.functions:
            out.extend(walk_block(f.body))
        return out

    def statement_map(self) -> dict[int, Stmt]:
        cached = self._cache.get("stmap")
        if cached is None:
            cached = {s.sid: s for s in self.statements()}
            self._cache["stmap"] = cached
        return cached

    def max_sid(self) -> int:
        return max((s.sid for s in self.statements()), default=0)


def children(stmt: Stmt) -> Iterator[Block]:
    """Nested blocks of a statement, in source order."""
    if isinstance(stmt, If):
        yield stmt.then
        if stmt.orelse is not None:
            yield stmt.orelse
    elif isinstance(stmt, While):
        yield stmt.body


def walk_block(block: Block) -> Iterator[Stmt]:
    for s in block:
        yield s
        for b in children(s):
            yield from walk_block(b)


def walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Expressions owned directly by ``stmt`` (not by nested blocks)."""
    if isinstance(stmt, (Assign, Print)):
        return [stmt.expr]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, Return):
        return [] if stmt.expr is None else [stmt.expr]
    if isinstance(stmt, CallStmt):
        return [stmt.call]
    return []


def renumber(program: Program, start: int = 1) -> Program:
    """Copy of ``program`` with sids reassigned in source order."""
    counter = [start]

    def block(b: Block) -> Block:
        return tuple(stmt(s) for s in b)

    def stmt(s: Stmt) -> Stmt:
        sid = counter[0]
        counter[0] += 1
        if isinstance(s, If):
            then = block(s.then)
            orelse = None if s.orelse is None else block(s.orelse)
            return replace(s, sid=sid, then=then, orelse=orelse)
        if isinstance(s, While):
            return replace(s, sid=sid, body=block(s.body))
        return replace(s, sid=sid)

    funcs = tuple(replace(f, body=block(f.body)) for f in program.functions)
    return Program(funcs)


def strip_sids(node):
    """Structure of a node with every sid zeroed (for id-insensitive comparison)."""
    if isinstance(node, Program):
        return tuple(strip_sids(f) for f in node.functions)
    if isinstance(node, Function):
        return (node.name, node.params, tuple(strip_sids(s) for s in node.body))
    if isinstance(node, tuple):
        return tuple(strip_sids(x) for x in node)
    if isinstance(node, STMT_TYPES):
        return (type(node).__name__,) + tuple(
            strip_sids(getattr(node, f.name)) for f in fields(node) if f.name != "sid"
        )
    return node
