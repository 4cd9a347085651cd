"""Command-line interface.

Exit codes: 0 success (for ``repair``: at least one post-initialization
patch), 2 ``repair`` found no patch, 1 any error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from .bundle import BundleError, BugBundle, bundled_ids, check_bundle, load_bug
from .config import RunConfig
from .evaluation import (
    METRICS, DegenerateTableWarning, collect_patches, evaluate_correctness,
    evaluate_diversity, fisher_exact_two_sided, fisher_tables, format_table1, load_correctness,
    load_diversity, render_reports, significance_line,
)
from .harness import NoFailingTests
from .lang import MiniLangError
from .search import TECHNIQUES, EvalCache, NoLocalizableFault, RunRecord, repair

log = logging.getLogger("divrepair")

DEFAULT_OUT = "divrepair-out"
ENV_OUT = "DIVREPAIR_OUT"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_seeds(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"0..9"`` -> [0, ..., 9] (inclusive)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _seed_list(text: str) -> list[int]:
    try:
        return parse_seeds(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key/value run configuration file")
    common.add_argument("--out", help=f"output root (default: ${ENV_OUT} or ./{DEFAULT_OUT})")
    common.add_argument("--jobs", type=int, default=1, help="parallel candidate evaluation processes")
    common.add_argument("-v", "--verbose", action="store_true")

    selection = argparse.ArgumentParser(add_help=False)
    selection.add_argument("--bug", action="append",
                           help="bug bundle path or bundled bug id; repeatable; 'all' for the bundled corpus")
    selection.add_argument("--technique", choices=[*TECHNIQUES, "both"], help="default: from config")
    selection.add_argument("--seed", type=int)
    selection.add_argument("--seeds", type=_seed_list, help="inclusive range A..B")

    parser = _Parser(prog="divrepair", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("repair", parents=[common, selection], help="run the repair search")
    p.add_argument("--pop-size", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--diversity-weight", type=float)

    sub.add_parser("evaluate", parents=[common, selection], help="held-out correctness of found patches")

    p = sub.add_parser("diversity", parents=[common, selection], help="semantic diversity of patch sets")
    p.add_argument("--metric", choices=METRICS, default="invariant")
    p.add_argument("--budget", type=int, help="testgen candidate inputs per program")

    p = sub.add_parser("stats", parents=[common], help="two-sided Fisher's exact test")
    p.add_argument("counts", nargs="*", type=int, metavar="N",
                   help="a b c d for the table [[a, b], [c, d]]; default: pooled correctness report")

    sub.add_parser("report", parents=[common], help="re-render report files")

    p = sub.add_parser("validate-corpus", parents=[common], help="check bug bundles")
    p.add_argument("--bug", action="append")

    p = sub.add_parser("config", parents=[common], help="print or write configuration")
    p.add_argument("--defaults", action="store_true", help="print default configuration")
    p.add_argument("--write", metavar="FILE", help="write the effective configuration to FILE")
    return parser


# -- helpers ---------------------------------------------------------------------------

def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {}
    for arg, key in (("pop_size", "pop_size"), ("generations", "max_generations"),
                     ("diversity_weight", "diversity_weight"), ("budget", "testgen_budget")):
        v = getattr(args, arg, None)
        if v is not None:
            changes[key] = v
    return dataclasses.replace(cfg, **changes) if changes else cfg


def output_root(args, cfg: RunConfig) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if os.environ.get(ENV_OUT):
        return Path(os.environ[ENV_OUT])
    return Path(cfg.out or DEFAULT_OUT)


def selected_bugs(args, cfg: RunConfig, root: Path | None = None) -> list[str]:
    specs = args.bug or ([cfg.bug] if cfg.bug else [])
    if not specs and root is not None and (root / "runs").is_dir():
        specs = sorted(p.name for p in (root / "runs").iterdir() if p.is_dir())
    if not specs:
        raise CliError("no bug selected (use --bug)")
    out = []
    for s in specs:
        out.extend(bundled_ids() if s == "all" else [s])
    return out


def selected_techniques(args, cfg: RunConfig, default_both: bool = False) -> list[str]:
    t = args.technique or ("both" if default_both else cfg.technique)
    if t == "both":
        return list(TECHNIQUES)
    if t not in TECHNIQUES:
        raise CliError(f"unknown technique {t!r}")
    return [t]


def selected_seeds(args, cfg: RunConfig) -> list[int]:
    if args.seeds is not None:
        return args.seeds
    if args.seed is not None:
        return [args.seed]
    return [cfg.seed]


def run_path(root: Path, bug_id: str, technique: str, seed: int) -> Path:
    return root / "runs" / bug_id / technique / f"seed{seed}.json"


def _load_records(root: Path, bug: BugBundle, technique: str, seeds: list[int] | None):
    directory = root / "runs" / bug.id / technique
    if seeds is None:
        paths = sorted(directory.glob("seed*.json"), key=lambda p: int(p.stem[4:]))
        if not paths:
            return [], [str(directory / "seed*.json")]
    else:
        paths = [run_path(root, bug.id, technique, s) for s in seeds]
    missing = [str(p) for p in paths if not p.exists()]
    records = [RunRecord.loads(p.read_text()) for p in paths if p.exists()]
    return records, missing


def _gather(args, cfg, root, default_seeds_from_disk=True):
    """(bug, technique, records) for the selection; raises CliError listing absent runs."""
    seeds = None
    if args.seeds is not None or args.seed is not None:
        seeds = selected_seeds(args, cfg)
    out, missing = [], []
    for bug_spec in selected_bugs(args, cfg, root):
        bug = load_bug(bug_spec, fuel=cfg.fuel)
        for technique in selected_techniques(args, cfg, default_both=True):
            records, absent = _load_records(root, bug, technique, seeds)
            missing.extend(absent)
            out.append((bug, technique, records))
    if missing:
        raise CliError("missing run records:\n  " + "\n  ".join(missing))
    return out


def _merge(existing, new, key):
    replaced = {key(r) for r in new}
    return [r for r in existing if key(r) not in replaced] + list(new)


def _existing(root: Path):
    rep = root / "reports"
    corr = load_correctness(rep / "correctness.json") if (rep / "correctness.json").exists() else []
    div = load_diversity(rep / "diversity.json") if (rep / "diversity.json").exists() else []
    return corr, div


# -- commands ------------------------------------------------------------------------------

def cmd_repair(args) -> int:
    cfg = load_config(args)
    root = output_root(args, cfg)
    found_any = False
    for bug_spec in selected_bugs(args, cfg):
        bug = load_bug(bug_spec, fuel=cfg.fuel)
        cache = EvalCache()
        for technique in selected_techniques(args, cfg):
            for seed in selected_seeds(args, cfg):
                record = repair(bug, cfg.search_config(seed), technique, jobs=args.jobs, cache=cache)
                path = run_path(root, bug.id, technique, seed)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(record.dumps())
                if record.invariants:
                    path.with_suffix(".invariants.txt").write_text(
                        "".join(f"{line}\n" for line in record.invariants))
                n = len(record.post_init_patches())
                found_any |= n > 0
                print(f"{bug.id} {technique} seed {seed}: {n} patch(es) after initialization, "
                      f"{len(record.patches) - n} discarded from initialization -> {path}")
    return 0 if found_any else 2


def cmd_evaluate(args) -> int:
    cfg = load_config(args)
    root = output_root(args, cfg)
    reports = []
    for bug, technique, records in _gather(args, cfg, root):
        ids, programs = collect_patches(records, bug.program)
        reports.append(evaluate_correctness(programs, bug.blackbox, bug.id, technique, ids, cfg.fuel))
    corr, div = _existing(root)
    corr = _merge(corr, reports, lambda r: (r.bug, r.technique))
    render_reports(corr, div, root / "reports")
    print(format_table1(corr), end="")
    return 0


def cmd_diversity(args) -> int:
    cfg = load_config(args)
    root = output_root(args, cfg)
    reports = []
    for bug, technique, records in _gather(args, cfg, root):
        ids, programs = collect_patches(records, bug.program)
        log.info("%s/%s: %d patches, metric %s", bug.id, technique, len(programs), args.metric)
        reports.append(evaluate_diversity(
            programs, args.metric, bug, technique, ids,
            budget=cfg.testgen_budget, seed=cfg.seed, min_support=cfg.min_support, fuel=cfg.fuel,
            save_dir=root / "diversity" / bug.id,
        ))
    corr, div = _existing(root)
    div = _merge(div, reports, lambda r: (r.bug, r.technique, r.metric))
    render_reports(corr, div, root / "reports")
    for r in reports:
        mean = "—" if r.mean is None else f"{r.mean:.4g}"
        print(f"{r.bug}  {r.technique}  {r.metric}  n={len(r.values)}  mean={mean}")
    return 0


def _fisher_line(a, b, c, d) -> str:
    if a + b + c + d == 0:
        return f"{significance_line(1.0)} (empty table)"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateTableWarning)
        p = fisher_exact_two_sided(a, b, c, d)
    return significance_line(p) + (" (degenerate table)" if caught else "")


def cmd_stats(args) -> int:
    if args.counts:
        if len(args.counts) != 4:
            raise CliError("stats takes exactly four counts: a b c d")
        a, b, c, d = args.counts
        if min(args.counts) < 0:
            raise CliError("counts must be nonnegative")
        print(f"[[{a}, {b}], [{c}, {d}]] {_fisher_line(a, b, c, d)}")
        return 0
    cfg = load_config(args)
    root = output_root(args, cfg)
    path = root / "reports" / "correctness.json"
    if not path.exists():
        raise CliError(f"missing correctness report {path} (run 'evaluate' first)")
    for label, (a, b, c, d) in fisher_tables(load_correctness(path)):
        print(f"{label}: [[{a}, {b}], [{c}, {d}]] {_fisher_line(a, b, c, d)}")
    return 0


def cmd_report(args) -> int:
    cfg = load_config(args)
    root = output_root(args, cfg)
    corr, div = _existing(root)
    for p in render_reports(corr, div, root / "reports"):
        print(p)
    return 0


def cmd_validate_corpus(args) -> int:
    specs = args.bug or bundled_ids()
    bad = 0
    for s in specs:
        try:
            bug = load_bug(s, validate=False)
            problems = check_bundle(bug)
        except (BundleError, MiniLangError, FileNotFoundError) as exc:
            problems = [str(exc)]
            bug = None
        name = bug.id if bug else s
        if problems:
            bad += 1
            for msg in problems:
                print(f"{name}: {msg}")
        else:
            print(f"{name}: ok ({len(bug.whitebox)} white-box, {len(bug.blackbox)} black-box tests)")
    return 1 if bad else 0


def cmd_config(args) -> int:
    cfg = RunConfig() if args.defaults else load_config(args)
    if args.write:
        cfg.save(args.write)
    else:
        print(cfg.dumps(), end="")
    return 0


COMMANDS = {
    "repair": cmd_repair,
    "evaluate": cmd_evaluate,
    "diversity": cmd_diversity,
    "stats": cmd_stats,
    "report": cmd_report,
    "validate-corpus": cmd_validate_corpus,
    "config": cmd_config,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, BundleError, NoFailingTests, NoLocalizableFault, MiniLangError,
            ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"divrepair: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
