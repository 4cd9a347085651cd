"""Deterministic interpreter for the mini-language.

The AST is walked once to build a tree of Python closures (one per node),
which are then run per execution. All mutable state lives in a per-call
:class:`_Machine`, so a compiled program can be shared across threads.

Semantics worth knowing:

* one *step* is one executed statement or one ``while`` condition test;
  exceeding ``fuel`` steps stops the run with status ``fuel_exhausted``;
* integers are 64-bit two's complement; ``/`` and ``%`` on integers
  truncate toward zero (C semantics); mixed int/float arithmetic is float;
* comparisons and ``&&``/``||``/``!`` yield booleans, which are only
  allowed in conditions; a boolean anywhere else is a type error;
* ``read`` consumes the next whitespace-separated token of the input;
* trace samples are taken at function entry, function exit, and before
  every loop-condition test, so a loop head's sample count always equals
  the number of its condition evaluations.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .nodes import (
    Assign, Binary, Call, CallStmt, Expr, Function, If, Num, Print, Program,
    Read, Return, Unary, Var, While,
)
from .printer import format_number
from .scope import ProgramPoint, entry, exit_, loop_head, point_scopes

DEFAULT_FUEL = 100_000
MAX_CALL_DEPTH = 64

_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


class Status(str, enum.Enum):
    COMPLETED = "completed"
    RUNTIME_ERROR = "runtime_error"
    FUEL_EXHAUSTED = "fuel_exhausted"

    def __str__(self) -> str:
        return self.value


BranchId = tuple[int, bool]
Sample = tuple[ProgramPoint, dict]


@dataclass(frozen=True)
class ExecOutcome:
    stdout: str
    status: Status
    steps_used: int
    coverage: frozenset
    trace: tuple[Sample, ...] | None = None
    executed: frozenset | None = None
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED


class MiniRuntimeError(Exception):
    pass


class _OutOfFuel(Exception):
    pass


class _Ret:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class _Machine:
    __slots__ = ("fuel", "steps", "tokens", "pos", "out", "trace", "coverage", "executed", "depth")

    def __init__(self, fuel, tokens, trace, statements):
        self.fuel = fuel
        self.steps = 0
        self.tokens = tokens
        self.pos = 0
        self.out: list[str] = []
        self.trace = [] if trace else None
        self.coverage: set = set()
        self.executed = set() if statements else None
        self.depth = 0


_WRAP = 1 << 64
_HALF = 1 << 63


def _wrap(x: int) -> int:
    if -_HALF <= x < _HALF:
        return x
    x %= _WRAP
    return x - _WRAP if x >= _HALF else x


def _type_error(what: str):
    return MiniRuntimeError(f"type error: {what}")


def _num(v, what: str):
    if type(v) is bool:
        raise _type_error(f"boolean used as a number in {what}")
    return v


def _truth(v) -> bool:
    if type(v) is bool:
        return v
    return v != 0


def _idiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return _wrap(q if (a >= 0) == (b >= 0) else -q)


def _imod(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _arith(op: str, a, b):
    if type(a) is bool or type(b) is bool:
        raise _type_error(f"boolean operand to {op!r}")
    if type(a) is int and type(b) is int:
        if op == "+":
            return _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if b == 0:
            raise MiniRuntimeError("division by zero")
        return _idiv(a, b) if op == "/" else _imod(a, b)
    a = float(a)
    b = float(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0.0:
        raise MiniRuntimeError("division by zero")
    return a / b if op == "/" else math.fmod(a, b)


def _compare(op: str, a, b) -> bool:
    if type(a) is bool or type(b) is bool:
        raise _type_error(f"boolean operand to {op!r}")
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


class _Compiler:
    def __init__(self, program: Program) -> None:
        self.program = program
        self.scopes = point_scopes(program)
        self.funcs: dict[str, "_CompiledFunction"] = {}
        for f in program.functions:
            self.funcs[f.name] = _CompiledFunction(f, self)
        for cf in self.funcs.values():
            cf.body = self.block(cf.func.body)

    # expressions
    def expr(self, e: Expr):
        if isinstance(e, Num):
            v = e.value
            return lambda env, m: v
        if isinstance(e, Var):
            name = e.name

            def var(env, m):
                try:
                    return env[name]
                except KeyError:
                    raise MiniRuntimeError(f"variable {name!r} used before assignment") from None
            return var
        if isinstance(e, Unary):
            inner = self.expr(e.operand)
            if e.op == "-":
                def neg(env, m):
                    v = _num(inner(env, m), "unary '-'")
                    return _wrap(-v) if type(v) is int else -v
                return neg
            return lambda env, m: not _truth(inner(env, m))
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Call):
            call = self.call(e)

            def value_call(env, m):
                v = call(env, m)
                if v is None:
                    raise MiniRuntimeError(f"function {e.name!r} returned no value")
                return v
            return value_call
        raise TypeError(e)

    def binary(self, e: Binary):
        left = self.expr(e.left)
        right = self.expr(e.right)
        op = e.op
        if op == "&&":
            return lambda env, m: _truth(left(env, m)) and _truth(right(env, m))
        if op == "||":
            return lambda env, m: _truth(left(env, m)) or _truth(right(env, m))
        if op in ("==", "!=", "<", "<=", ">", ">="):
            return lambda env, m: _compare(op, left(env, m), right(env, m))
        if op == "+":
            def add(env, m):
                a = left(env, m)
                b = right(env, m)
                if type(a) is int and type(b) is int:
                    return _wrap(a + b)
                return _arith(op, a, b)
            return add
        return lambda env, m: _arith(op, left(env, m), right(env, m))

    def call(self, e: Call):
        args = [self.expr(a) for a in e.args]
        funcs = self.funcs
        name = e.name

        def call(env, m):
            values = [_num(a(env, m), f"argument to {name!r}") for a in args]
            return funcs[name].invoke(values, m)
        return call

    # statements
    def block(self, stmts):
        compiled = [self.stmt(s) for s in stmts]
        if not compiled:
            return lambda env, m: None
        if len(compiled) == 1:
            return compiled[0]

        def run(env, m):
            for s in compiled:
                r = s(env, m)
                if r is not None:
                    return r
            return None
        return run

    def stmt(self, s):
        sid = s.sid

        def tick(m):
            m.steps += 1
            if m.steps > m.fuel:
                raise _OutOfFuel
            if m.executed is not None:
                m.executed.add(sid)

        if isinstance(s, Assign):
            ex = self.expr(s.expr)
            name = s.name

            def assign(env, m):
                tick(m)
                v = ex(env, m)
                if type(v) is bool:
                    raise _type_error(f"boolean assigned to {name!r}")
                env[name] = v
            return assign
        if isinstance(s, Print):
            ex = self.expr(s.expr)

            def print_(env, m):
                tick(m)
                m.out.append(format_number(_num(ex(env, m), "print")))
            return print_
        if isinstance(s, Read):
            name = s.name
            kind = s.kind

            def read(env, m):
                tick(m)
                if m.pos >= len(m.tokens):
                    raise MiniRuntimeError("read past end of input")
                tok = m.tokens[m.pos]
                m.pos += 1
                env[name] = _parse_token(tok, kind)
            return read
        if isinstance(s, Return):
            if s.expr is None:
                def ret_none(env, m):
                    tick(m)
                    return _Ret(None)
                return ret_none
            ex = self.expr(s.expr)

            def ret(env, m):
                tick(m)
                v = ex(env, m)
                if type(v) is bool:
                    raise _type_error("boolean returned")
                return _Ret(v)
            return ret
        if isinstance(s, CallStmt):
            call = self.call(s.call)

            def call_stmt(env, m):
                tick(m)
                call(env, m)
            return call_stmt
        if isinstance(s, If):
            cond = self.expr(s.cond)
            then = self.block(s.then)
            orelse = self.block(s.orelse) if s.orelse is not None else None
            taken, not_taken = (sid, True), (sid, False)

            def if_(env, m):
                tick(m)
                if _truth(cond(env, m)):
                    m.coverage.add(taken)
                    return then(env, m)
                m.coverage.add(not_taken)
                if orelse is not None:
                    return orelse(env, m)
                return None
            return if_
        if isinstance(s, While):
            cond = self.expr(s.cond)
            body = self.block(s.body)
            taken, not_taken = (sid, True), (sid, False)
            point = loop_head(sid)
            scope = tuple(sorted(self.scopes.get(point, ())))

            def while_(env, m):
                tick(m)
                first = True
                while True:
                    if not first:
                        m.steps += 1
                        if m.steps > m.fuel:
                            raise _OutOfFuel
                    first = False
                    if m.trace is not None:
                        m.trace.append((point, {v: env[v] for v in scope}))
                    if not _truth(cond(env, m)):
                        m.coverage.add(not_taken)
                        return None
                    m.coverage.add(taken)
                    r = body(env, m)
                    if r is not None:
                        return r
            return while_
        raise TypeError(s)


def _parse_token(tok: str, kind: str | None):
    if _INT_RE.match(tok):
        v = int(tok)
        if kind == "float":
            return float(v)
        return _wrap(v)
    if kind != "int" and _FLOAT_RE.match(tok):
        return float(tok)
    raise MiniRuntimeError(f"cannot read {tok!r} as {kind or 'a number'}")


class _CompiledFunction:
    def __init__(self, func: Function, compiler: _Compiler) -> None:
        self.func = func
        self.params = [(p.name, p.type) for p in func.params]
        self.body = None
        self.entry = entry(func.name)
        self.exit = exit_(func.name)
        self.entry_scope = tuple(sorted(compiler.scopes[self.entry]))
        self.exit_scope = tuple(sorted(compiler.scopes[self.exit]))

    def invoke(self, values, m: _Machine):
        if m.depth >= MAX_CALL_DEPTH:
            raise MiniRuntimeError("call depth limit exceeded")
        env = {}
        for (name, typ), v in zip(self.params, values):
            if typ == "int" and type(v) is not int:
                raise _type_error(f"float passed to int parameter {name!r}")
            env[name] = float(v) if typ == "float" else v
        if m.trace is not None:
            m.trace.append((self.entry, {v: env[v] for v in self.entry_scope}))
        m.depth += 1
        r = self.body(env, m)
        m.depth -= 1
        value = r.value if r is not None else None
        if m.trace is not None:
            sample = {v: env[v] for v in self.exit_scope}
            if value is not None:
                sample["return"] = value
            m.trace.append((self.exit, sample))
        return value


def _compiled(program: Program) -> _Compiler:
    c = program._cache.get("compiled")
    if c is None:
        c = _Compiler(program)
        program._cache["compiled"] = c
    return c


def execute(
    program: Program,
    input_text: str = "",
    fuel: int = DEFAULT_FUEL,
    trace_points: bool = False,
    record_statements: bool = False,
) -> ExecOutcome:
    """Run ``main`` of ``program`` on ``input_text``.

    Never raises for program misbehaviour; failures are reported through
    :attr:`ExecOutcome.status`. ``record_statements`` additionally collects
    the set of executed statement ids (used by fault localization).
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    compiled = _compiled(program)
    m = _Machine(fuel, input_text.split(), trace_points, record_statements)
    status = Status.COMPLETED
    error = None
    try:
        compiled.funcs["main"].invoke([], m)
    except _OutOfFuel:
        status = Status.FUEL_EXHAUSTED
        m.steps = fuel
    except MiniRuntimeError as exc:
        status = Status.RUNTIME_ERROR
        error = str(exc)
    except RecursionError:
        status = Status.RUNTIME_ERROR
        error = "stack overflow"
    stdout = "".join(line + "\n" for line in m.out)
    return ExecOutcome(
        stdout=stdout,
        status=status,
        steps_used=m.steps,
        coverage=frozenset(m.coverage),
        trace=tuple(m.trace) if m.trace is not None else None,
        executed=frozenset(m.executed) if m.executed is not None else None,
        error=error,
    )
