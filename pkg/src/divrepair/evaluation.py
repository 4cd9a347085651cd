"""Held-out correctness, patch-set diversity, Fisher's exact test, and reports."""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from .harness import TestCase, classify_tests, run_suite
from .invariants import infer_invariants, invariant_diversities, profile
from .lang import DEFAULT_FUEL, Program
from .search.edits import apply_edits
from .search.repair import RunRecord, parse_edits
from .testgen import DEFAULT_BUDGET, PairDistances, read_kinds

METRICS = ("invariant", "testgen")
TECHNIQUE_LABELS = {"genprog": "GenProg", "divgp": "Diversity-guided"}
ALPHA = 0.05


class DegenerateTableWarning(UserWarning):
    """A 2x2 table with an empty row or column; p is 1 by convention."""


# -- correctness --------------------------------------------------------------

@dataclass
class CorrectnessReport:
    bug: str
    technique: str
    patches_total: int = 0
    patches_correct: int = 0
    patch_ids: list[str] = field(default_factory=list)
    failed_blackbox: list[int] = field(default_factory=list)

    @property
    def patches_incorrect(self) -> int:
        return self.patches_total - self.patches_correct


def evaluate_correctness(
    patches: Sequence[Program],
    blackbox: Sequence[TestCase],
    bug: str = "",
    technique: str = "",
    patch_ids: Sequence[str] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> CorrectnessReport:
    """A patch is correct iff it passes every held-out (black-box) test."""
    ids = list(patch_ids) if patch_ids is not None else [str(i) for i in range(len(patches))]
    report = CorrectnessReport(bug, technique, patch_ids=ids)
    for p in patches:
        failed = sum(not ok for ok in run_suite(p, blackbox, fuel))
        report.failed_blackbox.append(failed)
        report.patches_total += 1
        report.patches_correct += failed == 0
    return report


# -- Fisher's exact test --------------------------------------------------------

def fisher_exact_two_sided(a: int, b: int, c: int, d: int) -> float:
    """Two-sided p-value for the 2x2 table [[a, b], [c, d]].

    Sums the hypergeometric probabilities of every table with the observed
    margins that is no more likely than the observed one (relative
    tolerance 1e-12). Tables with an empty row or column get p = 1 and a
    :class:`DegenerateTableWarning`.
    """
    for x in (a, b, c, d):
        if int(x) != x or x < 0:
            raise ValueError("counts must be nonnegative integers")
    a, b, c, d = int(a), int(b), int(c), int(d)
    r1, r2, c1 = a + b, c + d, a + c
    if r1 + r2 == 0:
        raise ValueError("empty table")
    if 0 in (r1, r2, c1, b + d):
        warnings.warn(DegenerateTableWarning(f"degenerate table {(a, b, c, d)}"), stacklevel=2)
        return 1.0
    lo, hi = max(0, c1 - r2), min(r1, c1)
    # exact integer weights proportional to the hypergeometric pmf
    weights = [comb(r1, x) * comb(r2, c1 - x) for x in range(lo, hi + 1)]
    observed = weights[a - lo]
    scale = 10**12
    tail = sum(w for w in weights if w * scale <= observed * (scale + 1))
    return min(1.0, tail / sum(weights))


def is_degenerate(a: int, b: int, c: int, d: int) -> bool:
    return 0 in (a + b, c + d, a + c, b + d)


# -- diversity --------------------------------------------------------------------

@dataclass
class DiversityReport:
    bug: str
    technique: str
    metric: str
    patch_ids: list[str] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float | None:
        if not self.values:
            return None
        return sum(self.values) / len(self.values)


def evaluate_diversity(
    patches: Sequence[Program],
    metric: str,
    bug,
    technique: str = "",
    patch_ids: Sequence[str] | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    min_support: int = 3,
    fuel: int = DEFAULT_FUEL,
    save_dir: str | Path | None = None,
) -> DiversityReport:
    """Diversity of each patch within the patch set of one bug and technique.

    ``bug`` needs ``id``, ``program`` and ``whitebox``. The invariant metric
    profiles every patch against invariants inferred from the faulty
    program; the testgen metric sums merged-suite distances with one
    derived seed per patch pair. Merged suites are written under
    ``save_dir`` when given.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    ids = list(patch_ids) if patch_ids is not None else [str(i) for i in range(len(patches))]
    report = DiversityReport(bug.id, technique, metric, ids)
    if not patches:
        return report
    if len(patches) == 1:
        report.values = [0.0]
        return report
    if metric == "invariant":
        positives, negatives = classify_tests(bug.program, bug.whitebox, fuel)
        invs = infer_invariants(bug.program, bug.whitebox, min_support, fuel)
        profiles = [profile(p, invs, positives, negatives, fuel) for p in patches]
        report.values = [float(v) for v in invariant_diversities(profiles)]
    else:
        pairs = PairDistances(patches, budget, seed, bug.id, ids, read_kinds(bug.program), fuel)
        report.values = pairs.diversities()
        if save_dir is not None:
            pairs.save(save_dir)
    return report


# -- run records -> patch sets ------------------------------------------------------

def collect_patches(records: Iterable[RunRecord], original: Program) -> tuple[list[str], list[Program]]:
    """Post-initialization patches of ``records`` as (ids, programs).

    Patches found while initializing are excluded. Identical patches from
    different runs are kept as separate members.
    """
    ids, programs = [], []
    for rec in sorted(records, key=lambda r: r.seed):
        for k, p in enumerate(rec.post_init_patches()):
            ids.append(f"{rec.technique}-s{rec.seed}-p{k}")
            programs.append(apply_edits(original, parse_edits(p["edits"])))
    return ids, programs


# -- reports ----------------------------------------------------------------------

def _fmt_mean(m: float | None) -> str:
    return "—" if m is None else f"{m:.4g}"


def _techniques(reports) -> list[str]:
    seen = list(dict.fromkeys(r.technique for r in reports))
    known = [t for t in TECHNIQUE_LABELS if t in seen]
    return known + [t for t in seen if t not in known]


def correctness_table(reports: Sequence[CorrectnessReport]) -> list[list[str]]:
    """Rows of the correctness table: header, one row per bug, then totals."""
    techs = _techniques(reports) or list(TECHNIQUE_LABELS)
    header = ["bug"]
    for t in techs:
        header += [f"{t}_correct", f"{t}_total"]
    by = {(r.bug, r.technique): r for r in reports}
    bugs = sorted({r.bug for r in reports})
    rows = [header]
    totals = {t: [0, 0] for t in techs}
    for bug in bugs:
        row = [bug]
        for t in techs:
            r = by.get((bug, t))
            c, n = (r.patches_correct, r.patches_total) if r else (0, 0)
            totals[t][0] += c
            totals[t][1] += n
            row += [str(c), str(n)]
        rows.append(row)
    if bugs:
        row = ["Total"]
        for t in techs:
            row += [str(totals[t][0]), str(totals[t][1])]
        rows.append(row)
    return rows


def format_table1(reports: Sequence[CorrectnessReport]) -> str:
    """Plain-text correctness table: ``bug  x/n  y/m`` per row."""
    rows = correctness_table(reports)
    techs = [h[: -len("_correct")] for h in rows[0][1::2]]
    lines = [["bug"] + [TECHNIQUE_LABELS.get(t, t) for t in techs]]
    for row in rows[1:]:
        cells = [row[0]]
        for i in range(len(techs)):
            cells.append(f"{row[1 + 2 * i]}/{row[2 + 2 * i]}")
        lines.append(cells)
    widths = [max(len(line[i]) for line in lines) for i in range(len(lines[0]))]
    return "".join(
        "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() + "\n" for line in lines
    )


def fisher_tables(reports: Sequence[CorrectnessReport], first: str = "genprog", second: str = "divgp"):
    """Pooled and per-bug (label, (a, b, c, d)) tables: correct/incorrect per technique."""
    by = {(r.bug, r.technique): r for r in reports}
    bugs = sorted({r.bug for r in reports})

    def counts(bug_list):
        a = b = c = d = 0
        for bug in bug_list:
            r1, r2 = by.get((bug, first)), by.get((bug, second))
            if r1:
                a += r1.patches_correct
                b += r1.patches_incorrect
            if r2:
                c += r2.patches_correct
                d += r2.patches_incorrect
        return a, b, c, d

    out = [("pooled", counts(bugs))]
    out += [(bug, counts([bug])) for bug in bugs]
    return out


def significance_line(p: float, alpha: float = ALPHA) -> str:
    verdict = "significant" if p <= alpha else "not significant"
    return f"p = {p:.6g} ({verdict} at {alpha:g})"


def render_reports(
    correctness: Sequence[CorrectnessReport],
    diversity: Sequence[DiversityReport],
    out_dir: str | Path,
) -> list[Path]:
    """Write ``correctness.csv``, ``diversity.csv``, ``summary.md`` (and JSON twins)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    correctness = sorted(correctness, key=lambda r: (r.bug, r.technique))
    diversity = sorted(diversity, key=lambda r: (r.bug, r.metric, r.technique))

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(correctness_table(correctness))
    (out / "correctness.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bug", "technique", "metric", "n_patches", "mean", "values"])
    for r in diversity:
        mean = "—" if r.mean is None else repr(r.mean)
        w.writerow([r.bug, r.technique, r.metric, len(r.values), mean, ";".join(repr(v) for v in r.values)])
    (out / "diversity.csv").write_text(buf.getvalue())

    (out / "correctness.json").write_text(
        json.dumps([asdict(r) for r in correctness], indent=1, sort_keys=True) + "\n")
    (out / "diversity.json").write_text(
        json.dumps([asdict(r) for r in diversity], indent=1, sort_keys=True) + "\n")
    (out / "summary.md").write_text(_summary(correctness, diversity))
    return [out / n for n in ("correctness.csv", "diversity.csv", "summary.md",
                              "correctness.json", "diversity.json")]


def _summary(correctness, diversity) -> str:
    lines = ["# Repair evaluation", "", "## Held-out correctness", "",
             "Correct patches (passing every black-box test) / post-initialization patches.", "",
             "```", format_table1(correctness).rstrip("\n"), "```", ""]
    incorrect = [f for r in correctness for f in r.failed_blackbox if f > 0]
    if incorrect:
        lines += [f"Incorrect patches fail between {min(incorrect)} and {max(incorrect)} black-box tests.", ""]
    lines += ["## Fisher's exact test (two-sided)", ""]
    if correctness:
        for label, (a, b, c, d) in fisher_tables(correctness):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateTableWarning)
                p = fisher_exact_two_sided(a, b, c, d) if a + b + c + d else 1.0
            note = " (degenerate table)" if is_degenerate(a, b, c, d) else ""
            lines.append(f"- {label}: [[{a}, {b}], [{c}, {d}]] {significance_line(p)}{note}")
    else:
        lines.append("- no patches")
    lines += ["", "## Mean semantic diversity", ""]
    techs = _techniques(diversity) or list(TECHNIQUE_LABELS)
    header = ["Bug"] + [f"{m} / {TECHNIQUE_LABELS.get(t, t)}" for m in METRICS for t in techs]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    by = {(r.bug, r.technique, r.metric): r for r in diversity}
    for bug in sorted({r.bug for r in diversity}):
        cells = [bug]
        for m in METRICS:
            for t in techs:
                r = by.get((bug, t, m))
                cells.append(_fmt_mean(r.mean) if r else "—")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def load_correctness(path: str | Path) -> list[CorrectnessReport]:
    return [CorrectnessReport(**d) for d in json.loads(Path(path).read_text())]


def load_diversity(path: str | Path) -> list[DiversityReport]:
    return [DiversityReport(**d) for d in json.loads(Path(path).read_text())]
