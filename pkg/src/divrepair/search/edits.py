"""Statement-level edits and their application to a program."""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

from ..lang import Program, is_valid, renumber
from ..lang.nodes import Block, Function, If, Stmt, While, walk_block

KINDS = ("append", "replace", "delete")

_EDIT_RE = re.compile(r"(append|replace|delete)\((\d+)(?:,(\d+))?\)\Z")


@dataclass(frozen=True)
class Edit:
    kind: str
    target: int
    donor: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if (self.donor is None) != (self.kind == "delete"):
            raise ValueError("append/replace need a donor; delete takes none")

    def __str__(self) -> str:
        if self.donor is None:
            return f"{self.kind}({self.target})"
        return f"{self.kind}({self.target},{self.donor})"

    @classmethod
    def parse(cls, text: str) -> "Edit":
        m = _EDIT_RE.match(text.replace(" ", ""))
        if m is None:
            raise ValueError(f"malformed edit {text!r}")
        kind, target, donor = m.groups()
        return cls(kind, int(target), None if donor is None else int(donor))


@dataclass(frozen=True)
class Patch:
    edits: tuple[Edit, ...] = ()
    generation: int = 0
    seed: int = 0

    @property
    def origin(self) -> str:
        return "init" if self.generation == 0 else f"generation {self.generation}"

    def edit_strings(self) -> list[str]:
        return [str(e) for e in self.edits]


def _copy_with_fresh_ids(stmt: Stmt, start: int) -> tuple[Stmt, int]:
    wrapped = renumber(Program((Function("_", (), (stmt,)),)), start)
    copy = wrapped.functions[0].body[0]
    return copy, start + sum(1 for _ in walk_block((copy,)))


def _rewrite(block: Block, target: int, make) -> tuple[Block, bool]:
    out: list[Stmt] = []
    found = False
    for s in block:
        if found:
            out.append(s)
            continue
        if s.sid == target:
            out.extend(make(s))
            found = True
            continue
        if isinstance(s, If):
            then, found = _rewrite(s.then, target, make)
            orelse = s.orelse
            if not found and orelse is not None:
                orelse, found = _rewrite(orelse, target, make)
            out.append(replace(s, then=then, orelse=orelse) if found else s)
        elif isinstance(s, While):
            body, found = _rewrite(s.body, target, make)
            out.append(replace(s, body=body) if found else s)
        else:
            out.append(s)
    return tuple(out), found


def apply_edit(current: Program, edit: Edit, donor: Stmt | None, next_sid: int) -> tuple[Program, int] | None:
    """Apply one edit; ``None`` if the target is absent or the result is ill-formed.

    Inserted donor copies receive fresh statement ids starting at ``next_sid``.
    """
    if edit.target not in current.statement_map():
        return None
    if edit.kind == "delete":
        make = lambda s: []  # noqa: E731
        after = next_sid
    else:
        copy, after = _copy_with_fresh_ids(donor, next_sid)
        if edit.kind == "replace":
            make = lambda s: [copy]  # noqa: E731
        else:
            make = lambda s: [s, copy]  # noqa: E731
    funcs = []
    done = False
    for f in current.functions:
        if not done:
            body, done = _rewrite(f.body, edit.target, make)
            funcs.append(replace(f, body=body) if done else f)
        else:
            funcs.append(f)
    result = Program(tuple(funcs))
    if not is_valid(result):
        return None
    return result, after


def apply_edits(original: Program, edits) -> Program:
    return replay(original, edits)[0]


def replay(original: Program, edits) -> tuple[Program, int]:
    """Apply ``edits`` in order to ``original`` (which is left untouched).

    Targets and donors name statements of the original program. An edit
    whose target no longer exists (e.g. an earlier edit deleted it) or that
    would leave the program ill-formed is skipped, so the result is always
    a well-formed program. Also returns the next unused statement id.
    """
    stmts = original.statement_map()
    current = original
    next_sid = original.max_sid() + 1
    for e in edits:
        donor = stmts.get(e.donor) if e.donor is not None else None
        if e.donor is not None and donor is None:
            continue
        applied = apply_edit(current, e, donor, next_sid)
        if applied is not None:
            current, next_sid = applied
    return current, next_sid
