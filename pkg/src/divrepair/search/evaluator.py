"""Cached candidate evaluation (test outcomes and invariant profiles).

Results are keyed by program text (plus statement ids for profiles, since
loop-head program points are identified by id), so syntactically equal
candidates are executed once. A cache may be shared across runs of the
same bug; results are pure functions of the program, so sharing never
changes a run.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from ..harness import TestCase, run_suite
from ..invariants import Invariant, profile
from ..lang import Program, pretty_print


@dataclass
class EvalCache:
    outcomes: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)


def _outcome_job(args):
    program, positives, negatives, fuel = args
    return run_suite(program, positives, fuel), run_suite(program, negatives, fuel)


def _profile_job(args):
    program, invs, positives, negatives, fuel = args
    return profile(program, invs, positives, negatives, fuel)


def _sid_key(program: Program) -> str:
    return pretty_print(program) + "#" + ",".join(str(s.sid) for s in program.statements())


class CandidateEvaluator:
    def __init__(
        self,
        positives: Sequence[TestCase],
        negatives: Sequence[TestCase],
        invariants: Sequence[Invariant] = (),
        fuel: int = 100_000,
        jobs: int = 1,
        cache: EvalCache | None = None,
    ) -> None:
        self.positives = list(positives)
        self.negatives = list(negatives)
        self.invariants = list(invariants)
        self.fuel = fuel
        self.jobs = jobs
        self.cache = cache if cache is not None else EvalCache()
        self._pool: ProcessPoolExecutor | None = None
        # guard against a cache shared between differently configured runs
        suite = tuple((t.id, t.input, t.expected_output) for t in self.positives + self.negatives)
        self._outcome_ctx = hash((fuel, suite))
        self._profile_ctx = hash((self._outcome_ctx, tuple(str(i) for i in self.invariants)))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _map(self, fn, jobs_args: list):
        if self.jobs <= 1 or len(jobs_args) <= 1:
            return [fn(a) for a in jobs_args]
        if self._pool is None:
            self._pool = ProcessPoolExecutor(self.jobs)
        # map preserves input order, so results are independent of scheduling
        return list(self._pool.map(fn, jobs_args, chunksize=max(1, len(jobs_args) // (4 * self.jobs))))

    def outcomes(self, programs: Sequence[Program]) -> list[tuple[tuple[bool, ...], tuple[bool, ...]]]:
        """(positive results, negative results) per program."""
        keys = [(self._outcome_ctx, pretty_print(p)) for p in programs]
        todo = {}
        for k, p in zip(keys, programs):
            if k not in self.cache.outcomes and k not in todo:
                todo[k] = p
        if todo:
            args = [(p, self.positives, self.negatives, self.fuel) for p in todo.values()]
            for k, res in zip(todo, self._map(_outcome_job, args)):
                self.cache.outcomes[k] = res
        return [self.cache.outcomes[k] for k in keys]

    def profiles(self, programs: Sequence[Program]) -> list[str]:
        keys = [(self._profile_ctx, _sid_key(p)) for p in programs]
        todo = {}
        for k, p in zip(keys, programs):
            if k not in self.cache.profiles and k not in todo:
                todo[k] = p
        if todo:
            args = [(p, self.invariants, self.positives, self.negatives, self.fuel) for p in todo.values()]
            for k, res in zip(todo, self._map(_profile_job, args)):
                self.cache.profiles[k] = res
        return [self.cache.profiles[k] for k in keys]
