"""Bug bundles: a faulty program, an optional reference, and two test suites.

Layout of a bundle directory::

    <bug-id>/
        program.mini          faulty program
        reference.mini        correct program (optional)
        fix.json              known fixing edit lists (optional)
        tests/whitebox/       repair-visible tests (<id>.in / <id>.out)
        tests/blackbox/       held-out tests
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .harness import TestCase, load_suite, run_test
from .lang import DEFAULT_FUEL, Program, parse

CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


class BundleError(Exception):
    pass


@dataclass
class BugBundle:
    id: str
    path: Path
    program: Program
    whitebox: list[TestCase]
    blackbox: list[TestCase]
    reference: Program | None = None
    known_fixes: list[list[str]] = field(default_factory=list)

    @property
    def source(self) -> Path:
        return self.path / "program.mini"


def bundled_ids() -> list[str]:
    return sorted(p.name for p in CORPUS_DIR.iterdir() if (p / "program.mini").exists())


def resolve_bug_path(spec: str | Path) -> Path:
    """Accept a bundle directory path or the id of a bundled bug."""
    p = Path(spec)
    if (p / "program.mini").exists():
        return p
    candidate = CORPUS_DIR / p.name
    if (candidate / "program.mini").exists():
        return candidate
    raise BundleError(f"no bug bundle at {spec!s} (and no bundled bug named {p.name!r})")


def load_bug(spec: str | Path, validate: bool = True, fuel: int = DEFAULT_FUEL) -> BugBundle:
    path = resolve_bug_path(spec)
    program = parse((path / "program.mini").read_text())
    ref_path = path / "reference.mini"
    reference = parse(ref_path.read_text()) if ref_path.exists() else None
    fixes_path = path / "fix.json"
    fixes = json.loads(fixes_path.read_text()) if fixes_path.exists() else []
    bug = BugBundle(
        id=path.name,
        path=path,
        program=program,
        whitebox=load_suite(path / "tests" / "whitebox", "whitebox"),
        blackbox=load_suite(path / "tests" / "blackbox", "blackbox"),
        reference=reference,
        known_fixes=fixes,
    )
    if validate:
        problems = check_bundle(bug, fuel)
        if problems:
            raise BundleError(f"{bug.id}: " + "; ".join(problems))
    return bug


def check_bundle(bug: BugBundle, fuel: int = DEFAULT_FUEL) -> list[str]:
    """Bundle invariants; returns human-readable problems (empty when valid)."""
    problems = []
    if not bug.whitebox:
        problems.append("white-box suite is empty")
    if not bug.blackbox:
        problems.append("black-box suite is empty")
    if bug.whitebox and all(run_test(bug.program, t, fuel) for t in bug.whitebox):
        problems.append("faulty program passes every white-box test")
    if bug.reference is not None:
        for t in bug.whitebox + bug.blackbox:
            if not run_test(bug.reference, t, fuel):
                problems.append(f"reference fails {t.origin} test {t.id}")
    return problems
