"""Canonical pretty-printer; ``parse(pretty_print(p))`` reproduces ``p``."""
from __future__ import annotations

from .nodes import (
    Assign, Binary, Call, CallStmt, Expr, If, Num, Print, Program, Read,
    Return, Stmt, Unary, Var, While,
)
from .parser import PRECEDENCE, UNARY_PRECEDENCE

INDENT = "    "


def format_number(v) -> str:
    # repr gives the shortest string that round-trips a float
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_expr(e: Expr, parent_prec: int = -1, right: bool = False) -> str:
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = format_expr(e.operand, UNARY_PRECEDENCE)
        # "- -x" must not lex as "--x"; keep a space only where needed
        text = f"{e.op}{inner}" if not inner.startswith("-") else f"{e.op}({inner})"
        return f"({text})" if parent_prec > UNARY_PRECEDENCE else text
    if isinstance(e, Binary):
        prec = PRECEDENCE[e.op]
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec, right=True)}"
        # operators are left-associative: a right child at equal precedence needs parens
        if prec < parent_prec or (prec == parent_prec and right):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def _stmt_lines(s: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, Assign):
        return [f"{pad}{s.name} = {format_expr(s.expr)};"]
    if isinstance(s, Print):
        return [f"{pad}print {format_expr(s.expr)};"]
    if isinstance(s, Read):
        kind = f"{s.kind} " if s.kind else ""
        return [f"{pad}read {kind}{s.name};"]
    if isinstance(s, Return):
        return [f"{pad}return;" if s.expr is None else f"{pad}return {format_expr(s.expr)};"]
    if isinstance(s, CallStmt):
        return [f"{pad}{format_expr(s.call)};"]
    if isinstance(s, While):
        return [f"{pad}while {format_expr(s.cond)} {{", *_block_lines(s.body, depth + 1), f"{pad}}}"]
    if isinstance(s, If):
        lines = [f"{pad}if {format_expr(s.cond)} {{", *_block_lines(s.then, depth + 1)]
        node = s
        while node.orelse is not None:
            if len(node.orelse) == 1 and isinstance(node.orelse[0], If):
                node = node.orelse[0]
                lines.append(f"{pad}}} else if {format_expr(node.cond)} {{")
                lines.extend(_block_lines(node.then, depth + 1))
            else:
                lines.append(f"{pad}}} else {{")
                lines.extend(_block_lines(node.orelse, depth + 1))
                break
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _block_lines(block, depth: int) -> list[str]:
    out: list[str] = []
    for s in block:
        out.extend(_stmt_lines(s, depth))
    return out


def pretty_print(program: Program) -> str:
    chunks = []
    for f in program.functions:
        params = ", ".join(f"{p.type} {p.name}" for p in f.params)
        lines = [f"func {f.name}({params}) {{", *_block_lines(f.body, 1), "}"]
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
