"""Coverage-guided random test generation and merged-suite semantic distance.

Inputs are whitespace-separated numerals, one per ``read`` statement found
in ``main`` (pre-order, each statement counted once). Integer reads draw
uniformly from [-100, 100]; ``read float`` draws uniformly from the same
range with two decimals. A candidate input is kept only if it covers a
branch direction the archive has not yet covered. If nothing is kept (no
branches), the first candidate is kept so the suite is never empty.

The distance between programs P and Q generates T_P and T_Q from the same
seed, runs both programs on T_P followed by the unseen inputs of T_Q, and
reports the fraction of inputs where their (status, stdout) signatures
differ.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .lang import DEFAULT_FUEL, Program, execute, pretty_print
from .lang.nodes import Read, walk_block
from .rng import SplitMix64, derive_seed

DEFAULT_BUDGET = 200
VALUE_RANGE = 100


@dataclass(frozen=True)
class GeneratedSuite:
    inputs: tuple[str, ...]
    covered: frozenset


Signature = tuple[str, str]


def read_kinds(p: Program) -> list[str]:
    """Kind ("int" or "float") of each input token ``main`` consumes."""
    main = p.function("main")
    return ["float" if s.kind == "float" else "int" for s in walk_block(main.body) if isinstance(s, Read)]


def _draw_input(kinds: Sequence[str], rng: SplitMix64) -> str:
    tokens = []
    for kind in kinds:
        if kind == "float":
            cents = rng.randint(-VALUE_RANGE * 100, VALUE_RANGE * 100)
            tokens.append(f"{cents / 100:.2f}")
        else:
            tokens.append(str(rng.randint(-VALUE_RANGE, VALUE_RANGE)))
    return " ".join(tokens)


def generate_suite(
    p: Program,
    budget: int,
    rng: SplitMix64,
    kinds: Sequence[str] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> GeneratedSuite:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if kinds is None:
        kinds = read_kinds(p)
    if not kinds:
        outcome = execute(p, "", fuel)
        return GeneratedSuite(("",), outcome.coverage)
    kept: list[str] = []
    covered: set = set()
    first = None
    for _ in range(budget):
        text = _draw_input(kinds, rng)
        if first is None:
            first = text
        if text in kept:
            continue
        outcome = execute(p, text, fuel)
        if not outcome.coverage <= covered:
            covered |= outcome.coverage
            kept.append(text)
    if not kept:
        kept.append(first)
    return GeneratedSuite(tuple(kept), frozenset(covered))


def merge_suites(tp: GeneratedSuite | Sequence[str], tq: GeneratedSuite | Sequence[str]) -> list[str]:
    a = tp.inputs if isinstance(tp, GeneratedSuite) else tuple(tp)
    b = tq.inputs if isinstance(tq, GeneratedSuite) else tuple(tq)
    merged = list(dict.fromkeys(a))
    seen = set(merged)
    for x in b:
        if x not in seen:
            seen.add(x)
            merged.append(x)
    return merged


def behavior_report(p: Program, inputs: Sequence[str], fuel: int = DEFAULT_FUEL) -> list[Signature]:
    out = []
    for text in inputs:
        o = execute(p, text, fuel)
        out.append((o.status.value, o.stdout))
    return out


def report_distance(rp: Sequence[Signature], rq: Sequence[Signature]) -> float:
    if len(rp) != len(rq):
        raise ValueError("reports of different lengths")
    if not rp:
        return 0.0
    return sum(a != b for a, b in zip(rp, rq)) / len(rp)


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    merged: tuple[str, ...]
    report_p: tuple[Signature, ...]
    report_q: tuple[Signature, ...]


def testgen_distance_detail(
    p: Program,
    q: Program,
    budget: int,
    seed: int,
    kinds: Sequence[str] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> DistanceResult:
    if kinds is None:
        kinds = read_kinds(p)
    tp = generate_suite(p, budget, SplitMix64(seed), kinds, fuel)
    if pretty_print(p) == pretty_print(q):
        # same text, same seed: T_Q == T_P and both reports coincide
        merged = list(tp.inputs)
        rp = rq = behavior_report(p, merged, fuel)
    else:
        tq = generate_suite(q, budget, SplitMix64(seed), kinds, fuel)
        merged = merge_suites(tp, tq)
        rp = behavior_report(p, merged, fuel)
        rq = behavior_report(q, merged, fuel)
    return DistanceResult(report_distance(rp, rq), tuple(merged), tuple(rp), tuple(rq))


def testgen_distance(
    p: Program,
    q: Program,
    budget: int,
    rng: SplitMix64,
    kinds: Sequence[str] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> float:
    """Normalized Hamming distance of behaviour reports on the merged suite.

    Consumes one draw from ``rng`` to seed both suite generators.
    """
    return testgen_distance_detail(p, q, budget, rng.next_u64(), kinds, fuel).distance


class PairDistances:
    """Pairwise testgen distances over a patch list, one computation per unordered pair.

    Each pair gets its own seed derived from ``master_seed``, the bug id and
    both patch ids, so results do not depend on evaluation order.
    """

    def __init__(
        self,
        patches: Sequence[Program],
        budget: int,
        master_seed: int,
        bug_id: str = "",
        patch_ids: Sequence[str] | None = None,
        kinds: Sequence[str] | None = None,
        fuel: int = DEFAULT_FUEL,
    ) -> None:
        self.patches = list(patches)
        self.budget = budget
        self.master_seed = master_seed
        self.bug_id = bug_id
        self.patch_ids = list(patch_ids) if patch_ids is not None else [str(i) for i in range(len(patches))]
        self.kinds = kinds
        self.fuel = fuel
        self._cache: dict[tuple[int, int], DistanceResult] = {}

    def pair_seed(self, i: int, j: int) -> int:
        a, b = sorted((self.patch_ids[i], self.patch_ids[j]))
        return derive_seed(self.master_seed, self.bug_id, a, b)

    def detail(self, i: int, j: int) -> DistanceResult:
        key = (min(i, j), max(i, j))
        hit = self._cache.get(key)
        if hit is None:
            a, b = key
            hit = testgen_distance_detail(
                self.patches[a], self.patches[b], self.budget, self.pair_seed(a, b), self.kinds, self.fuel
            )
            self._cache[key] = hit
        return hit

    def distance(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return self.detail(i, j).distance

    def diversity(self, member: int) -> float:
        return sum(self.distance(member, j) for j in range(len(self.patches)) if j != member)

    def diversities(self) -> list[float]:
        return [self.diversity(i) for i in range(len(self.patches))]

    def save(self, directory: str | Path) -> None:
        """Write ``<pair>/suite.txt`` and ``<pair>/report.json`` for every computed pair."""
        directory = Path(directory)
        for (i, j), res in sorted(self._cache.items()):
            pair_dir = directory / f"{self.patch_ids[i]}__{self.patch_ids[j]}".replace("/", "-")
            write_suite_file(pair_dir / "suite.txt", res.merged)
            payload = {
                "p": self.patch_ids[i],
                "q": self.patch_ids[j],
                "seed": self.pair_seed(i, j),
                "distance": res.distance,
                "report_p": [list(s) for s in res.report_p],
                "report_q": [list(s) for s in res.report_q],
            }
            (pair_dir / "report.json").write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def testgen_diversity(
    member_index: int,
    patches: Sequence[Program],
    budget: int,
    rng: SplitMix64,
    kinds: Sequence[str] | None = None,
) -> float:
    """Sum of distances from ``patches[member_index]`` to every other patch."""
    return PairDistances(patches, budget, rng.seed, kinds=kinds).diversity(member_index)


def write_suite_file(path: str | Path, inputs: Sequence[str]) -> None:
    """One JSON-encoded input string per line (so empty inputs survive)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(x) + "\n" for x in inputs))


def read_suite_file(path: str | Path) -> list[str]:
    return [json.loads(line) for line in Path(path).read_text().splitlines()]
