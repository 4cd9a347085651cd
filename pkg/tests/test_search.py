from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import pytest

from divrepair.harness import TestCase, classify_tests, run_suite
from divrepair.lang import parse, pretty_print
from divrepair.rng import SplitMix64
from divrepair.search import (
    Edit, EvalCache, NoLocalizableFault, Patch, RunRecord, SearchConfig, apply_edits, crossover,
    localize, mutate, parse_edits, repair, select,
)
from divrepair.search.neighborhood import one_edit_fixes, single_edits

PROG = parse("""
func main() {
    read x;
    if x > 0 {
        print 1;
    } else {
        print 2;
    }
    print 0;
}
""")


def tc(i, inp, out):
    return TestCase(f"t{i}", inp, out)


# -- edits -----------------------------------------------------------------------------

def test_edit_text_round_trip():
    for text in ("delete(5)", "append(5,12)", "replace(1,2)"):
        assert str(Edit.parse(text)) == text
    with pytest.raises(ValueError):
        Edit("delete", 3, 4)
    with pytest.raises(ValueError):
        Edit("append", 3)


def test_apply_edits_basic():
    deleted = apply_edits(PROG, [Edit("delete", 5)])
    assert "print 0" not in pretty_print(deleted)
    appended = apply_edits(PROG, [Edit("append", 5, 3)])
    assert len(appended.statements()) == len(PROG.statements()) + 1
    assert pretty_print(appended).count("print 1;") == 2
    # the inserted copy gets a fresh id beyond the original range
    assert max(s.sid for s in appended.statements()) == PROG.max_sid() + 1


def test_delete_only_statement_gives_empty_block():
    p = parse("func main() { print 1; }")
    q = apply_edits(p, [Edit("delete", 1)])
    assert q.functions[0].body == ()


def test_invalid_edits_are_skipped():
    # deleting the read leaves x undeclared, so the edit is rejected
    assert apply_edits(PROG, [Edit("delete", 1)]) == PROG
    # target removed by an earlier edit
    assert apply_edits(PROG, [Edit("delete", 2), Edit("delete", 3)]) == apply_edits(PROG, [Edit("delete", 2)])


def test_application_is_non_destructive():
    before = pretty_print(PROG)
    rng = SplitMix64(1)
    weights = {s.sid: 1.0 for s in PROG.statements()}
    patch = Patch()
    for _ in range(30):
        patch = mutate(patch, PROG, weights, rng)
        apply_edits(PROG, patch.edits)
    assert pretty_print(PROG) == before


# -- operators ----------------------------------------------------------------------------

def test_localize_weights():
    pos = [tc(1, "5", "1\n0\n")]
    neg = [tc(2, "-5", "9\n0\n")]
    w = localize(PROG, pos, neg)
    assert w[4] == 1.0        # else branch: negatives only
    assert w[1] == 0.1 and w[5] == 0.1
    assert w[3] == 0.0        # then branch: positives only
    dead = parse("func main() { read x; if 0 { print 1; } print x; }")
    assert localize(dead, [], [tc(1, "1", "2\n")])[3] == 0.0


def test_localize_needs_an_executed_statement():
    empty = parse("func main() { }")
    with pytest.raises(NoLocalizableFault):
        localize(empty, [], [tc(1, "", "1\n")])


def test_mutate_is_deterministic_and_appends_one_edit():
    w = {s.sid: 1.0 for s in PROG.statements()}
    a = mutate(Patch(), PROG, w, SplitMix64(42))
    b = mutate(Patch(), PROG, w, SplitMix64(42))
    assert a == b and len(a.edits) == 1
    c = mutate(a, PROG, w, SplitMix64(7))
    assert c.edits[:1] == a.edits and len(c.edits) == 2


def test_mutate_only_targets_weighted_statements():
    w = {s.sid: 0.0 for s in PROG.statements()}
    w[5] = 1.0
    rng = SplitMix64(3)
    for _ in range(50):
        assert mutate(Patch(), PROG, w, rng).edits[0].target == 5


def test_mutate_falls_back_to_identity():
    # once statement 1 is deleted no edit can target it, so every attempt is rejected
    q = parse("func main() { return; }")
    patch = Patch((Edit("delete", 1),))
    assert mutate(patch, q, {1: 1.0}, SplitMix64(0)).edits == patch.edits


def test_crossover_examples():
    e1, e2, f1 = Edit("delete", 1), Edit("delete", 2), Edit("delete", 3)

    class FixedCuts:
        def __init__(self, *cuts):
            self.cuts = list(cuts)

        def below(self, n):
            return self.cuts.pop(0)

    a, b = crossover(Patch((e1, e2)), Patch((f1,)), FixedCuts(1, 0))
    assert a.edits == (e1, f1) and b.edits == (e2,)
    a, b = crossover(Patch(), Patch(), SplitMix64(0))
    assert a.edits == () and b.edits == ()
    rng = SplitMix64(5)
    for _ in range(50):
        x, y = Patch((e1, e2, f1)), Patch((f1, e2))
        c, d = crossover(x, y, rng)
        assert Counter(c.edits + d.edits) == Counter(x.edits + y.edits)


def test_select_examples():
    p15, p5 = Patch((Edit("delete", 1),)), Patch((Edit("delete", 2),))
    rng = SplitMix64(0)
    for _ in range(20):
        # with k large enough both contestants appear; the fitter one must win
        assert select([(p15, 15, 0), (p5, 5, 0)], 8, 0.0, 20, 10, rng) == p15
        assert select([(p15, 10, 4), (p5, 10, 0)], 8, 0.5, 20, 10, rng) == p15
    pop = [(p15, 10, 0), (p5, 10, 0)]
    assert [select(pop, 2, 0.0, 20, 10, SplitMix64(s)) for s in range(20)] == \
           [select(pop, 2, 0.0, 20, 10, SplitMix64(s)) for s in range(20)]


def test_select_ignores_diversity_when_lambda_zero():
    pop = [(Patch((Edit("delete", i),)), float(i % 3), 0.0) for i in range(1, 9)]
    shaken = [(p, f, float(i * 37 % 11)) for i, (p, f, _) in enumerate(pop)]
    for s in range(30):
        assert select(pop, 2, 0.0, 10, 100, SplitMix64(s)) == select(shaken, 2, 0.0, 10, 100, SplitMix64(s))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(pop_size=1)
    with pytest.raises(ValueError):
        SearchConfig(tournament_k=0)
    with pytest.raises(ValueError):
        SearchConfig(diversity_weight=1.5)


# -- repair loop ------------------------------------------------------------------------

def small(seed=0, **kw):
    return SearchConfig(pop_size=10, max_generations=3, seed=seed, **kw)


def test_repair_record_round_trip(bugs):
    rec = repair(bugs["median-b1"], small(), "divgp")
    assert RunRecord.loads(rec.dumps()) == rec
    assert RunRecord.loads(rec.dumps()).dumps() == rec.dumps()
    assert len(rec.generations) == 4
    assert rec.invariants and all(len(c["profile"]) == 2 * len(rec.invariants)
                                  for g in rec.generations for c in g["candidates"])


def test_zero_generations_gives_only_init_patches(bugs):
    for seed in range(5):
        rec = repair(bugs["median-b1"], SearchConfig(pop_size=40, max_generations=0, seed=seed), "genprog")
        assert all(p["discarded"] and p["generation"] == 0 for p in rec.patches)
        assert rec.post_init_patches() == []


def test_genprog_records_no_diversity(bugs):
    rec = repair(bugs["digits-b2"], small(), "genprog")
    assert rec.invariants == []
    assert all(c["diversity"] is None and c["profile"] is None
               for g in rec.generations for c in g["candidates"])


def test_reported_patches_pass_whitebox(bugs):
    bug = bugs["median-b1"]
    rec = repair(bug, SearchConfig(seed=1), "divgp")
    assert rec.post_init_patches()
    for p in rec.patches:
        prog = apply_edits(bug.program, parse_edits(p["edits"]))
        assert all(run_suite(prog, bug.whitebox))
        assert pretty_print(prog) == p["source"]


def test_repair_rejects_correct_program(bugs):
    @dataclass
    class Fixed:
        id: str
        program: object
        whitebox: list

    bug = bugs["median-b1"]
    from divrepair.harness import NoFailingTests
    with pytest.raises(NoFailingTests):
        repair(Fixed("ok", bug.reference, bug.whitebox), small(), "genprog")
    with pytest.raises(ValueError):
        repair(bug, small(), "random")


def test_shared_cache_does_not_change_results(bugs):
    bug = bugs["grade-b1"]
    cache = EvalCache()
    a = repair(bug, small(seed=4), "divgp", cache=cache)
    b = repair(bug, small(seed=4), "divgp", cache=cache)
    c = repair(bug, small(seed=4), "divgp")
    assert a.dumps() == b.dumps() == c.dumps()


# -- neighborhood -----------------------------------------------------------------------

def test_bundled_fixes_are_one_edit_fixes(bugs):
    for bug in bugs.values():
        for fix in bug.known_fixes:
            prog = apply_edits(bug.program, parse_edits(fix))
            assert all(run_suite(prog, bug.whitebox)), bug.id
            assert all(run_suite(prog, bug.blackbox)), bug.id


def test_single_edits_are_well_formed():
    variants = list(single_edits(PROG))
    assert variants
    assert all(p != PROG or e.kind == "replace" for e, p in variants)
    fixes = one_edit_fixes(PROG, [tc(1, "-3", "1\n0\n"), tc(2, "3", "1\n0\n")])
    assert Edit("replace", 4, 3) in fixes
