"""The repair loop shared by plain GenProg and the diversity-guided variant.

Both techniques initialize identically: ``pop_size`` single-edit mutants
of the original. Afterwards each generation selects parents by tournament,
applies one-point crossover to each parent pair, then mutates each child.
``genprog`` ranks contestants by test fitness only; ``divgp`` blends
normalized fitness with the candidate's invariant-profile diversity within
the current population.

Candidates that pass every white-box test are recorded as patches. Those
found while initializing are kept in the record but flagged as discarded.
After initialization, each distinct patched program is recorded once per
run, at the generation where it first appears.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from ..harness import FitnessWeights, TestCase, classify_tests, max_fitness, weighted_fitness
from ..invariants import DEFAULT_MIN_SUPPORT, EmptyTraces, format_invariants, infer_invariants, invariant_diversities
from ..lang import DEFAULT_FUEL, Program, pretty_print
from ..rng import SplitMix64
from .edits import Edit, Patch, apply_edits
from .evaluator import CandidateEvaluator, EvalCache
from .operators import crossover, localize, mutate, select

log = logging.getLogger(__name__)

TECHNIQUES = ("genprog", "divgp")


@dataclass(frozen=True)
class SearchConfig:
    pop_size: int = 40
    max_generations: int = 10
    tournament_k: int = 2
    w_pos: float = 1.0
    w_neg: float = 10.0
    diversity_weight: float = 0.5
    mutation_rate: float = 1.0
    seed: int = 0
    fuel: int = DEFAULT_FUEL
    min_support: int = DEFAULT_MIN_SUPPORT

    def __post_init__(self) -> None:
        if self.pop_size < 2:
            raise ValueError("pop_size must be at least 2")
        if self.tournament_k < 1:
            raise ValueError("tournament_k must be at least 1")
        if not 0.0 <= self.diversity_weight <= 1.0:
            raise ValueError("diversity_weight must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.max_generations < 0:
            raise ValueError("max_generations must be nonnegative")

    @property
    def weights(self) -> FitnessWeights:
        return FitnessWeights(self.w_pos, self.w_neg)


@dataclass
class RunRecord:
    bug: str
    technique: str
    seed: int
    config: dict
    n_positives: int
    n_negatives: int
    max_fitness: float
    invariants: list[str]
    initial_population: list[dict]
    generations: list[dict]
    patches: list[dict] = field(default_factory=list)

    def post_init_patches(self) -> list[dict]:
        return [p for p in self.patches if not p["discarded"]]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)

    @classmethod
    def loads(cls, text: str) -> "RunRecord":
        return cls.from_dict(json.loads(text))

    def initial_population_dump(self) -> str:
        return json.dumps(self.initial_population, sort_keys=True)


def parse_edits(strings: Sequence[str]) -> tuple[Edit, ...]:
    return tuple(Edit.parse(s) for s in strings)


def repair(
    bug,
    cfg: SearchConfig,
    technique: str,
    jobs: int = 1,
    cache: EvalCache | None = None,
) -> RunRecord:
    """Run one repair attempt.

    ``bug`` needs ``id``, ``program`` (the faulty :class:`Program`) and
    ``whitebox`` (its repair-visible tests). Raises ``NoFailingTests`` or
    ``NoLocalizableFault`` when there is nothing to repair.
    """
    if technique not in TECHNIQUES:
        raise ValueError(f"unknown technique {technique!r}")
    original: Program = bug.program
    whitebox: Sequence[TestCase] = bug.whitebox
    weights = cfg.weights
    positives, negatives = classify_tests(original, whitebox, cfg.fuel)
    fault_weights = localize(original, positives, negatives, cfg.fuel)
    fmax = max_fitness(len(positives), len(negatives), weights)

    invariants = []
    if technique == "divgp":
        try:
            invariants = infer_invariants(original, whitebox, cfg.min_support, cfg.fuel)
        except EmptyTraces:
            log.warning("%s: no traces; diversity term disabled", bug.id)
    dmax = 2 * len(invariants) * (cfg.pop_size - 1)
    lam = cfg.diversity_weight if technique == "divgp" else 0.0

    rng = SplitMix64(cfg.seed)
    record = RunRecord(
        bug=bug.id,
        technique=technique,
        seed=cfg.seed,
        config=asdict(cfg),
        n_positives=len(positives),
        n_negatives=len(negatives),
        max_fitness=fmax,
        invariants=[str(i) for i in invariants],
        initial_population=[],
        generations=[],
    )
    seen_init: set[str] = set()
    seen_post: set[str] = set()

    with CandidateEvaluator(positives, negatives, invariants, cfg.fuel, jobs, cache) as ev:

        def evaluate(pop: list[Patch], generation: int) -> list[tuple[Patch, float, float]]:
            programs = [apply_edits(original, p.edits) for p in pop]
            outcomes = ev.outcomes(programs)
            fits = [weighted_fitness(sum(po), sum(ne), weights) for po, ne in outcomes]
            profiles: list[str | None] = [None] * len(pop)
            divs: list[float] = [0.0] * len(pop)
            if technique == "divgp" and invariants:
                profiles = ev.profiles(programs)
                divs = [float(d) for d in invariant_diversities(profiles)]
            rows = []
            for patch, prog, (po, ne), fit, prof, div in zip(pop, programs, outcomes, fits, profiles, divs):
                row = {
                    "edits": patch.edit_strings(),
                    "fitness": fit,
                    "diversity": div if technique == "divgp" else None,
                    "profile": prof,
                }
                rows.append(row)
                if all(po) and all(ne):
                    _record_patch(record, patch, prog, generation, seen_init, seen_post)
            record.generations.append({"generation": generation, "candidates": rows})
            return list(zip(pop, fits, divs))

        init = [mutate(Patch(seed=cfg.seed), original, fault_weights, rng) for _ in range(cfg.pop_size)]
        scored = evaluate(init, 0)
        record.initial_population = [
            {"edits": p.edit_strings(), "fitness": f} for p, f, _ in scored
        ]

        for gen in range(1, cfg.max_generations + 1):
            children: list[Patch] = []
            while len(children) < cfg.pop_size:
                a = select(scored, cfg.tournament_k, lam, fmax, dmax, rng)
                b = select(scored, cfg.tournament_k, lam, fmax, dmax, rng)
                for child in crossover(a, b, rng):
                    child = Patch(child.edits, gen, cfg.seed)
                    if cfg.mutation_rate >= 1.0 or rng.random() < cfg.mutation_rate:
                        child = mutate(child, original, fault_weights, rng)
                    children.append(child)
            scored = evaluate(children[: cfg.pop_size], gen)
            log.debug("%s/%s seed %d gen %d: best %.1f/%.1f", bug.id, technique, cfg.seed, gen,
                      max(f for _, f, _ in scored), fmax)
    return record


def _record_patch(record: RunRecord, patch: Patch, program: Program, generation: int,
                  seen_init: set, seen_post: set) -> None:
    source = pretty_print(program)
    seen = seen_init if generation == 0 else seen_post
    if source in seen:
        return
    seen.add(source)
    record.patches.append({
        "edits": patch.edit_strings(),
        "generation": generation,
        "origin": "init" if generation == 0 else "search",
        "discarded": generation == 0,
        "source": source,
    })


def invariants_text(record: RunRecord) -> str:
    return "".join(f"{line}\n" for line in record.invariants)


__all__ = ["RunRecord", "SearchConfig", "TECHNIQUES", "format_invariants", "parse_edits", "repair"]
