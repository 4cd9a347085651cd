"""Likely-invariant inference, invariant profiles and profile distances.

Invariants are inferred from traces of the original (faulty) program over
a fixed grammar of seven templates. A candidate's *profile* is a string
over ``U``/``S``/``V`` with two characters per invariant (positive-test
runs, then negative-test runs):

* ``U``: the invariant's program point was never reached,
* ``S``: reached and never violated,
* ``V``: violated at least once.

A sample that lacks one of an invariant's variables (possible in a mutated
candidate) counts as a violation.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .harness import TestCase
from .lang import DEFAULT_FUEL, Program, ProgramPoint, execute, point_scopes
from .lang.printer import format_number

# template order is part of the canonical invariant order
TEMPLATES = ("==c", ">=c", "<=c", "!=0", "==", "<", "<=")
_UNARY = {"==c", ">=c", "<=c", "!=0"}

DEFAULT_MIN_SUPPORT = 3


class EmptyTraces(Exception):
    """No test execution reached any program point."""


class LengthMismatch(ValueError):
    """Profiles of different lengths (i.e. from different bugs) were compared."""


@dataclass(frozen=True)
class Invariant:
    point: ProgramPoint
    template: str
    operands: tuple[str, ...]
    constant: int | float | None = None

    def holds(self, sample: dict) -> bool:
        try:
            values = [sample[v] for v in self.operands]
        except KeyError:
            return False
        t = self.template
        if t == "==c":
            return values[0] == self.constant
        if t == ">=c":
            return values[0] >= self.constant
        if t == "<=c":
            return values[0] <= self.constant
        if t == "!=0":
            return values[0] != 0
        a, b = values
        if t == "==":
            return a == b
        if t == "<":
            return a < b
        return a <= b

    def __str__(self) -> str:
        if self.template in _UNARY:
            v = self.operands[0]
            if self.template == "!=0":
                text = f"{v} != 0"
            else:
                text = f"{v} {self.template[:-1]} {format_number(self.constant)}"
        else:
            text = f"{self.operands[0]} {self.template} {self.operands[1]}"
        return f"{text} @ {self.point}"

    @classmethod
    def parse(cls, line: str) -> "Invariant":
        body, _, point = line.strip().rpartition(" @ ")
        left, op, right = body.split(" ")
        pt = ProgramPoint.parse(point)
        if op == "!=":
            return cls(pt, "!=0", (left,))
        if right[:1].isdigit() or right[:1] == "-":
            const = float(right) if any(c in right for c in ".eEn") else int(right)
            return cls(pt, op + "c", (left,), const)
        return cls(pt, op, (left, right))


def _collect(program: Program, tests: Iterable[TestCase], fuel: int) -> dict[ProgramPoint, list[dict]]:
    samples: dict[ProgramPoint, list[dict]] = defaultdict(list)
    for t in tests:
        outcome = execute(program, t.input, fuel, trace_points=True)
        for point, values in outcome.trace:
            samples[point].append(values)
    return samples


def infer_invariants(
    original: Program,
    suite: Sequence[TestCase],
    min_support: int = DEFAULT_MIN_SUPPORT,
    fuel: int = DEFAULT_FUEL,
) -> list[Invariant]:
    """Every template instance that holds on all samples of a well-supported point.

    Order is canonical: program point order, then template order, then
    operand order (variable names sorted).
    """
    if min_support < 1:
        raise ValueError("min_support must be at least 1")
    samples = _collect(original, suite, fuel)
    if not any(samples.values()):
        raise EmptyTraces("no program point was reached")
    order = list(point_scopes(original))
    invs: list[Invariant] = []
    for point in order:
        rows = samples.get(point, [])
        if len(rows) < min_support:
            continue
        names = set(rows[0])
        for r in rows[1:]:
            names &= set(r)
        # NaN compares false with everything, so no template can hold
        names = sorted(v for v in names if not any(_isnan(r[v]) for r in rows))
        invs.extend(_instantiate(point, names, rows))
    return invs


def _isnan(v) -> bool:
    return isinstance(v, float) and math.isnan(v)


def _instantiate(point: ProgramPoint, names: list[str], rows: list[dict]) -> list[Invariant]:
    cols = {v: [r[v] for r in rows] for v in names}
    out: list[Invariant] = []
    for v in names:
        first = cols[v][0]
        if all(x == first for x in cols[v]):
            out.append(Invariant(point, "==c", (v,), first))
    for v in names:
        out.append(Invariant(point, ">=c", (v,), min(cols[v])))
    for v in names:
        out.append(Invariant(point, "<=c", (v,), max(cols[v])))
    for v in names:
        if all(x != 0 for x in cols[v]):
            out.append(Invariant(point, "!=0", (v,)))
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if all(x == y for x, y in zip(cols[a], cols[b])):
                out.append(Invariant(point, "==", (a, b)))
    for template, rel in (("<", lambda x, y: x < y), ("<=", lambda x, y: x <= y)):
        for a in names:
            for b in names:
                if a != b and all(rel(x, y) for x, y in zip(cols[a], cols[b])):
                    out.append(Invariant(point, template, (a, b)))
    return out


def profile(
    candidate: Program,
    invs: Sequence[Invariant],
    positives: Sequence[TestCase],
    negatives: Sequence[TestCase],
    fuel: int = DEFAULT_FUEL,
) -> str:
    """Invariant profile of ``candidate``: ``2 * len(invs)`` characters."""
    by_point: dict[ProgramPoint, list[int]] = defaultdict(list)
    for i, inv in enumerate(invs):
        by_point[inv.point].append(i)
    columns = []
    for tests in (positives, negatives):
        reached = [False] * len(invs)
        violated = [False] * len(invs)
        for t in tests:
            outcome = execute(candidate, t.input, fuel, trace_points=True)
            for point, values in outcome.trace:
                idxs = by_point.get(point)
                if not idxs:
                    continue
                for i in idxs:
                    reached[i] = True
                    if not violated[i] and not invs[i].holds(values):
                        violated[i] = True
        columns.append(["V" if v else "S" if r else "U" for r, v in zip(reached, violated)])
    pos, neg = columns
    return "".join(p + n for p, n in zip(pos, neg))


def invariant_distance(a: str, b: str) -> int:
    """Hamming distance between two profiles."""
    if len(a) != len(b):
        raise LengthMismatch(f"profile lengths differ: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def invariant_diversity(member: str, population: Sequence[str]) -> int:
    """Sum of distances from ``member`` to every profile in ``population``.

    ``member`` is expected to be one of the population; its distance to
    itself is zero, so including it changes nothing.
    """
    return sum(invariant_distance(member, other) for other in population)


def invariant_diversities(population: Sequence[str]) -> list[int]:
    """Diversity of every member, computing each unordered pair once."""
    n = len(population)
    totals = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            d = invariant_distance(population[i], population[j])
            totals[i] += d
            totals[j] += d
    return totals


def format_invariants(invs: Sequence[Invariant]) -> str:
    return "".join(f"{inv}\n" for inv in invs)


def parse_invariants(text: str) -> list[Invariant]:
    return [Invariant.parse(line) for line in text.splitlines() if line.strip()]
