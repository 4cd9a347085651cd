"""Test cases, suite execution and the weighted-sum repair fitness."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .lang import DEFAULT_FUEL, Program, execute


class NoFailingTests(Exception):
    """The original program passes every test, so there is no bug to repair."""


@dataclass(frozen=True)
class TestCase:
    # not a pytest class
    __test__ = False

    id: str
    input: str
    expected_output: str
    origin: str = "whitebox"  # "whitebox" or "blackbox"


@dataclass(frozen=True)
class FitnessWeights:
    w_pos: float = 1.0
    w_neg: float = 10.0

    def __post_init__(self) -> None:
        if self.w_pos < 0 or self.w_neg < 0 or self.w_pos + self.w_neg <= 0:
            raise ValueError("weights must be nonnegative with a positive sum")


def load_suite(directory: str | Path, origin: str) -> list[TestCase]:
    """Read ``<id>.in``/``<id>.out`` pairs from ``directory``, sorted by id."""
    directory = Path(directory)
    tests = []
    for inp in sorted(directory.glob("*.in")):
        out = inp.with_suffix(".out")
        if not out.exists():
            raise FileNotFoundError(f"missing expected output {out}")
        tests.append(TestCase(inp.stem, inp.read_text(), out.read_text(), origin))
    return tests


def write_suite(directory: str | Path, tests: Sequence[TestCase]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t in tests:
        (directory / f"{t.id}.in").write_text(t.input)
        (directory / f"{t.id}.out").write_text(t.expected_output)


def run_test(p: Program, t: TestCase, fuel: int = DEFAULT_FUEL) -> bool:
    """True iff ``p`` completes on the test input with exactly the expected stdout."""
    outcome = execute(p, t.input, fuel)
    return outcome.completed and outcome.stdout == t.expected_output


def run_suite(p: Program, tests: Sequence[TestCase], fuel: int = DEFAULT_FUEL) -> tuple[bool, ...]:
    return tuple(run_test(p, t, fuel) for t in tests)


def classify_tests(
    original: Program, suite: Sequence[TestCase], fuel: int = DEFAULT_FUEL
) -> tuple[list[TestCase], list[TestCase]]:
    """Split ``suite`` into (positives, negatives) by running the original program."""
    if not suite:
        raise ValueError("empty test suite")
    positives, negatives = [], []
    for t in suite:
        (positives if run_test(original, t, fuel) else negatives).append(t)
    if not negatives:
        raise NoFailingTests("the original program passes every test")
    return positives, negatives


def weighted_fitness(pos_passed: int, neg_passed: int, w: FitnessWeights) -> float:
    return w.w_pos * pos_passed + w.w_neg * neg_passed


def max_fitness(n_pos: int, n_neg: int, w: FitnessWeights) -> float:
    return weighted_fitness(n_pos, n_neg, w)


def fitness(
    p: Program,
    positives: Sequence[TestCase],
    negatives: Sequence[TestCase],
    w: FitnessWeights = FitnessWeights(),
    fuel: int = DEFAULT_FUEL,
) -> float:
    pos = sum(run_suite(p, positives, fuel))
    neg = sum(run_suite(p, negatives, fuel))
    return weighted_fitness(pos, neg, w)
