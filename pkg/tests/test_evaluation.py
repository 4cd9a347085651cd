from __future__ import annotations

import json
import random
import warnings
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from divrepair.evaluation import (
    CorrectnessReport, DegenerateTableWarning, DiversityReport, collect_patches, correctness_table,
    evaluate_correctness, evaluate_diversity, fisher_exact_two_sided, fisher_tables, format_table1,
    load_correctness, load_diversity, render_reports, significance_line,
)
from divrepair.lang import parse
from divrepair.search import SearchConfig, repair


def table_prob(a, b, c, d) -> Fraction:
    n = a + b + c + d
    num = factorial(a + b) * factorial(c + d) * factorial(a + c) * factorial(b + d)
    return Fraction(num, factorial(n) * factorial(a) * factorial(b) * factorial(c) * factorial(d))


def brute_fisher(a, b, c, d) -> float:
    """Enumerate every table with the observed margins."""
    r1, r2, c1 = a + b, c + d, a + c
    obs = table_prob(a, b, c, d)
    total = Fraction(0)
    for x in range(0, r1 + 1):
        y = c1 - x
        if 0 <= y <= r2:
            pr = table_prob(x, r1 - x, y, r2 - y)
            if pr <= obs * (1 + Fraction(1, 10**12)):
                total += pr
    return float(min(total, Fraction(1)))


def quiet_fisher(*t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateTableWarning)
        return fisher_exact_two_sided(*t)


def test_fisher_headline_table():
    p = fisher_exact_two_sided(12, 13, 13, 13)
    assert p > 0.05
    assert p == pytest.approx(brute_fisher(12, 13, 13, 13), abs=1e-9)


def test_fisher_known_values():
    # classic tea-tasting table: one-sided 0.2429, two-sided 0.4857
    assert fisher_exact_two_sided(3, 1, 1, 3) == pytest.approx(0.4857142857, abs=1e-9)
    assert fisher_exact_two_sided(10, 0, 0, 10) == pytest.approx(2 / 184756, rel=1e-12)


def test_fisher_degenerate():
    with pytest.warns(DegenerateTableWarning):
        assert fisher_exact_two_sided(0, 5, 0, 7) == 1.0
    with pytest.raises(ValueError):
        fisher_exact_two_sided(0, 0, 0, 0)
    with pytest.raises(ValueError):
        fisher_exact_two_sided(-1, 2, 3, 4)


def test_fisher_matches_enumeration_oracle():
    r = random.Random(2024)
    for _ in range(200):
        t = [r.randint(0, 15) for _ in range(4)]
        if sum(t) == 0:
            continue
        assert quiet_fisher(*t) == pytest.approx(brute_fisher(*t), abs=1e-9), t


cells = st.tuples(*[st.integers(0, 25)] * 4).filter(lambda t: sum(t) > 0)


@given(cells)
def test_fisher_symmetries_and_range(t):
    a, b, c, d = t
    p = quiet_fisher(a, b, c, d)
    assert 0 <= p <= 1
    assert quiet_fisher(c, d, a, b) == pytest.approx(p, rel=1e-12)
    assert quiet_fisher(b, a, d, c) == pytest.approx(p, rel=1e-12)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 4), st.integers(0, 4))
def test_fisher_equal_proportions(k1, k2, x, y):
    # rows (x*k1, y*k1) and (x*k2, y*k2) have equal proportions
    if x + y == 0:
        return
    assert quiet_fisher(x * k1, y * k1, x * k2, y * k2) == pytest.approx(1.0, abs=1e-12)


def test_significance_line():
    assert "not significant at 0.05" in significance_line(0.8)
    assert "not" not in significance_line(0.01)


# -- correctness --------------------------------------------------------------------------

def test_correctness_reference_and_overfit(bugs):
    bug = bugs["median-b1"]
    rep = evaluate_correctness([bug.reference], bug.blackbox)
    assert (rep.patches_total, rep.patches_correct) == (1, 1)
    assert evaluate_correctness([], bug.blackbox).patches_total == 0


def test_correctness_uses_only_blackbox(bugs):
    bug = bugs["grade-b1"]
    rep = evaluate_correctness([bug.program], [])
    assert rep.patches_correct == 1  # nothing held out, nothing failed


# -- diversity ----------------------------------------------------------------------------

def test_diversity_singleton_and_identical(bugs):
    bug = bugs["mean-b1"]
    for metric in ("invariant", "testgen"):
        one = evaluate_diversity([bug.reference], metric, bug, budget=50)
        assert one.values == [0.0] and one.mean == 0
        same = evaluate_diversity([bug.reference] * 3, metric, bug, budget=50)
        assert same.values == [0.0] * 3
    assert evaluate_diversity([], "invariant", bug).mean is None
    with pytest.raises(ValueError):
        evaluate_diversity([bug.reference], "edit-distance", bug)


def test_diversity_of_distinct_programs_is_positive(bugs):
    bug = bugs["digits-b1"]
    rep = evaluate_diversity([bug.program, bug.reference], "testgen", bug, budget=100)
    assert rep.values[0] == rep.values[1] > 0


def test_collect_patches_excludes_init(bugs):
    bug = bugs["median-b1"]
    rec = repair(bug, SearchConfig(seed=0), "genprog")
    ids, progs = collect_patches([rec], bug.program)
    assert len(ids) == len(rec.post_init_patches()) == len(progs)
    assert all("-s0-" in i for i in ids)


# -- reports ------------------------------------------------------------------------------

def reports():
    return [
        CorrectnessReport("b1", "genprog", 3, 2, ["x", "y", "z"], [0, 1, 0]),
        CorrectnessReport("b1", "divgp", 4, 4, ["p", "q", "r", "s"], [0, 0, 0, 0]),
        CorrectnessReport("b2", "genprog", 1, 0, ["t"], [2]),
        CorrectnessReport("b2", "divgp", 0, 0, [], []),
    ]


def test_table_rows():
    rows = correctness_table(reports())
    assert rows[0] == ["bug", "genprog_correct", "genprog_total", "divgp_correct", "divgp_total"]
    assert rows[1] == ["b1", "2", "3", "4", "4"]
    assert rows[-1] == ["Total", "2", "4", "4", "4"]
    lines = [line.split() for line in format_table1(reports()).splitlines()]
    assert lines[0] == ["bug", "GenProg", "Diversity-guided"]
    assert lines[1:] == [["b1", "2/3", "4/4"], ["b2", "0/1", "0/0"], ["Total", "2/4", "4/4"]]


def test_fisher_tables_pool_and_split():
    tables = dict(fisher_tables(reports()))
    assert tables["pooled"] == (2, 2, 4, 0)
    assert tables["b1"] == (2, 1, 4, 0)


def test_render_is_deterministic_and_loadable(tmp_path):
    div = [DiversityReport("b1", "genprog", "invariant", ["x", "y"], [2.0, 4.0]),
           DiversityReport("b1", "divgp", "testgen", [], [])]
    a = render_reports(reports(), div, tmp_path / "a")
    b = render_reports(reports(), div, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    key = lambda r: (r.bug, r.technique)
    assert load_correctness(tmp_path / "a" / "correctness.json") == sorted(reports(), key=key)
    assert sorted(load_diversity(tmp_path / "a" / "diversity.json"), key=key) == sorted(div, key=key)
    summary = (tmp_path / "a" / "summary.md").read_text()
    assert "pooled" in summary and "—" in summary and "| 3 |" in summary
    csv_lines = (tmp_path / "a" / "correctness.csv").read_text().splitlines()
    assert csv_lines[-1].startswith("Total")


def test_render_empty(tmp_path):
    paths = render_reports([], [], tmp_path)
    text = {p.name: p.read_text() for p in paths}
    assert text["correctness.csv"].splitlines()[0].startswith("bug")
    assert text["diversity.csv"].splitlines()[0].startswith("bug")
    assert json.loads(text["correctness.json"]) == []
