"""Program points and the variables statically in scope at each.

A variable is in scope at a point when it is definitely assigned on every
path reaching that point. Trace samples record exactly these variables, so
every sampled variable is guaranteed to be bound at run time.
"""
from __future__ import annotations

from typing import NamedTuple

from .nodes import Assign, Block, Function, If, Program, Read, Return, While
from .parser import declared_variables


class ProgramPoint(NamedTuple):
    kind: str  # "entry", "exit" or "loop_head"
    where: str | int  # function name, or loop statement id

    def __str__(self) -> str:
        return f"{self.kind}({self.where})"

    @classmethod
    def parse(cls, text: str) -> "ProgramPoint":
        kind, _, rest = text.partition("(")
        where = rest.rstrip(")")
        return cls(kind, int(where) if kind == "loop_head" else where)


def entry(name: str) -> ProgramPoint:
    return ProgramPoint("entry", name)


def exit_(name: str) -> ProgramPoint:
    return ProgramPoint("exit", name)


def loop_head(sid: int) -> ProgramPoint:
    return ProgramPoint("loop_head", sid)


def _function_scopes(func: Function) -> dict[ProgramPoint, frozenset[str]]:
    everything = frozenset(declared_variables(func))
    scopes: dict[ProgramPoint, frozenset[str]] = {}
    exits: list[frozenset[str]] = []

    # None stands for "unreachable": the identity for intersection
    def meet(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return a & b

    def block(stmts: Block, live):
        for s in stmts:
            live = stmt(s, live)
        return live

    def stmt(s, live):
        if isinstance(s, (Assign, Read)):
            return None if live is None else live | {s.name}
        if isinstance(s, If):
            t = block(s.then, live)
            e = live if s.orelse is None else block(s.orelse, live)
            return meet(t, e)
        if isinstance(s, While):
            scopes[loop_head(s.sid)] = everything if live is None else live
            block(s.body, live)
            return live
        if isinstance(s, Return):
            if live is not None:
                exits.append(live)
            return None
        return live

    start = frozenset(p.name for p in func.params)
    scopes[entry(func.name)] = start
    end = block(func.body, start)
    if end is not None:
        exits.append(end)
    out = None
    for e in exits:
        out = meet(out, e)
    scopes[exit_(func.name)] = everything if out is None else out
    return scopes


def point_scopes(program: Program) -> dict[ProgramPoint, frozenset[str]]:
    """Map every program point to its statically in-scope variables.

    Iteration order is the canonical point order: per function in source
    order, entry first, then loop heads in source order, then exit.
    """
    cached = program._cache.get("scopes")
    if cached is not None:
        return cached
    out: dict[ProgramPoint, frozenset[str]] = {}
    for f in program.functions:
        scopes = _function_scopes(f)
        out[entry(f.name)] = scopes.pop(entry(f.name))
        ex = scopes.pop(exit_(f.name))
        for p in sorted(scopes, key=lambda p: p.where):
            out[p] = scopes[p]
        out[exit_(f.name)] = ex
    program._cache["scopes"] = out
    return out
