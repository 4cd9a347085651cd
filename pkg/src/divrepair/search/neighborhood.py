"""Exhaustive enumeration of single-edit variants (an offline check, not a search)."""
from __future__ import annotations

from typing import Iterator, Sequence

from ..harness import TestCase, run_suite
from ..lang import DEFAULT_FUEL, Program
from .edits import KINDS, Edit, apply_edit


def single_edits(original: Program, targets: Sequence[int] | None = None) -> Iterator[tuple[Edit, Program]]:
    """Every well-formed one-edit variant, optionally restricted to ``targets``."""
    stmts = original.statements()
    next_sid = original.max_sid() + 1
    for target in (targets if targets is not None else [s.sid for s in stmts]):
        for kind in KINDS:
            donors = [None] if kind == "delete" else stmts
            for donor in donors:
                edit = Edit(kind, target, None if donor is None else donor.sid)
                applied = apply_edit(original, edit, donor, next_sid)
                if applied is not None:
                    yield edit, applied[0]


def one_edit_fixes(
    original: Program,
    tests: Sequence[TestCase],
    targets: Sequence[int] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> list[Edit]:
    """Single edits whose result passes every test in ``tests``."""
    return [e for e, p in single_edits(original, targets) if all(run_suite(p, tests, fuel))]
