"""Fault localization and the genetic operators.

PRNG draw order (all from one SplitMix64 stream):

* mutate, per attempt: target (one weighted draw), operator (``below(3)``),
  donor (``below(n_statements)``, append/replace only); up to
  ``MAX_MUTATION_ATTEMPTS`` attempts;
* crossover: cut in the first parent, then cut in the second;
* select: ``k`` contestant draws, each followed by a tie coin only when
  the contestant ties the current best.
"""
from __future__ import annotations

from typing import Sequence

from ..harness import TestCase
from ..lang import DEFAULT_FUEL, Program, execute
from ..rng import SplitMix64
from .edits import KINDS, Edit, Patch, apply_edit, replay

MAX_MUTATION_ATTEMPTS = 20

NEGATIVE_ONLY_WEIGHT = 1.0
SHARED_WEIGHT = 0.1


class NoLocalizableFault(Exception):
    """No statement executed by a negative test; nothing to mutate."""


def localize(
    original: Program,
    positives: Sequence[TestCase],
    negatives: Sequence[TestCase],
    fuel: int = DEFAULT_FUEL,
) -> dict[int, float]:
    """Weight per statement id: 1.0 negative-only, 0.1 shared, 0.0 otherwise."""
    if not negatives:
        raise ValueError("localization needs at least one negative test")

    def executed(tests) -> set[int]:
        out: set[int] = set()
        for t in tests:
            out |= execute(original, t.input, fuel, record_statements=True).executed
        return out

    neg = executed(negatives)
    pos = executed(positives)
    weights = {}
    for s in original.statements():
        if s.sid in neg:
            weights[s.sid] = SHARED_WEIGHT if s.sid in pos else NEGATIVE_ONLY_WEIGHT
        else:
            weights[s.sid] = 0.0
    if not any(weights.values()):
        raise NoLocalizableFault("negative tests execute no statement")
    return weights


def mutate(patch: Patch, original: Program, weights: dict[int, float], rng: SplitMix64) -> Patch:
    """Return ``patch`` extended by one random edit that applies cleanly.

    Falls back to an unchanged copy after ``MAX_MUTATION_ATTEMPTS`` rejected
    samples.
    """
    targets = list(weights)
    target_weights = [weights[t] for t in targets]
    statements = original.statements()
    current, next_sid = replay(original, patch.edits)
    for _ in range(MAX_MUTATION_ATTEMPTS):
        target = targets[rng.weighted_index(target_weights)]
        kind = KINDS[rng.below(3)]
        donor = None
        if kind != "delete":
            donor = statements[rng.below(len(statements))]
        edit = Edit(kind, target, None if donor is None else donor.sid)
        if apply_edit(current, edit, donor, next_sid) is not None:
            return Patch(patch.edits + (edit,), patch.generation, patch.seed)
    return Patch(patch.edits, patch.generation, patch.seed)


def crossover(a: Patch, b: Patch, rng: SplitMix64) -> tuple[Patch, Patch]:
    """One-point crossover on the edit lists."""
    ca = rng.below(len(a.edits) + 1)
    cb = rng.below(len(b.edits) + 1)
    first = Patch(a.edits[:ca] + b.edits[cb:], a.generation, a.seed)
    second = Patch(b.edits[:cb] + a.edits[ca:], b.generation, b.seed)
    return first, second


def selection_score(
    fitness: float,
    diversity: float,
    diversity_weight: float,
    max_fitness: float,
    max_diversity: float,
) -> float:
    f = fitness / max_fitness if max_fitness > 0 else 0.0
    if diversity_weight == 0:
        return f
    d = diversity / max_diversity if max_diversity > 0 else 0.0
    return (1.0 - diversity_weight) * f + diversity_weight * d


def select(
    population: Sequence[tuple[Patch, float, float]],
    tournament_k: int,
    diversity_weight: float,
    max_fitness: float,
    max_diversity: float,
    rng: SplitMix64,
) -> Patch:
    """Tournament selection on the normalized fitness/diversity blend."""
    if not population:
        raise ValueError("empty population")
    best = None
    best_score = 0.0
    for _ in range(tournament_k):
        i = rng.below(len(population))
        patch, fit, div = population[i]
        score = selection_score(fit, div, diversity_weight, max_fitness, max_diversity)
        if best is None or score > best_score:
            best, best_score = patch, score
        elif score == best_score and rng.coin():
            best = patch
    return best
