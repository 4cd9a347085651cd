from __future__ import annotations

import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from divrepair.bundle import CORPUS_DIR, BundleError, bundled_ids, load_bug
from divrepair.cli import main, parse_seeds
from divrepair.config import RunConfig

# sha256 of runs/median-b1/divgp/seed3.json, recorded from the first verified run
GOLDEN_MEDIAN_DIVGP_SEED3 = "fe6c70cf31668440ae69dee1fe93d6aaddffc370704a5587b556a2b5e6a27826"


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_parse_seeds():
    assert parse_seeds("3") == [3]
    assert parse_seeds("0..9") == list(range(10))


def test_repair_golden_digest(tmp_path, capsys):
    rc = main(["repair", "--bug", "corpus/median-b1", "--technique", "divgp", "--seed", "3",
               "--out", str(tmp_path)])
    assert rc == 0
    run = tmp_path / "runs" / "median-b1" / "divgp" / "seed3.json"
    assert digest(run) == GOLDEN_MEDIAN_DIVGP_SEED3
    assert (tmp_path / "runs" / "median-b1" / "divgp" / "seed3.invariants.txt").exists()
    assert "median-b1 divgp seed 3" in capsys.readouterr().out


def test_seed_sweep_writes_one_record_per_seed(tmp_path):
    rc = main(["repair", "--bug", "mean-b1", "--technique", "genprog", "--seeds", "0..9",
               "--pop-size", "6", "--generations", "1", "--out", str(tmp_path)])
    assert rc in (0, 2)
    assert sorted(p.name for p in (tmp_path / "runs" / "mean-b1" / "genprog").glob("*.json")) == \
        sorted(f"seed{i}.json" for i in range(10))


def test_repair_without_patch_exits_2(tmp_path):
    rc = main(["repair", "--bug", "digits-b1", "--technique", "genprog", "--seed", "0",
               "--pop-size", "2", "--generations", "0", "--out", str(tmp_path)])
    assert rc == 2


def test_unknown_technique_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["repair", "--bug", "median-b1", "--technique", "random"])
    assert info.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_missing_bug_and_config_errors(tmp_path, capsys):
    assert main(["repair", "--bug", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[divrepair]\npop_size = many\n")
    assert main(["repair", "--bug", "median-b1", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("DIVREPAIR_OUT", str(tmp_path / "env"))
    main(["repair", "--bug", "median-b1", "--technique", "genprog", "--seed", "0",
          "--pop-size", "4", "--generations", "1"])
    assert (tmp_path / "env" / "runs" / "median-b1" / "genprog" / "seed0.json").exists()


def test_evaluate_diversity_report_pipeline(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["repair", "--bug", "median-b1", "--bug", "grade-b1", "--technique", "both",
                 "--seeds", "0..1", "--out", out]) == 0
    assert main(["evaluate", "--out", out]) == 0
    csv_rows = (tmp_path / "reports" / "correctness.csv").read_text().splitlines()
    assert [r.split(",")[0] for r in csv_rows] == ["bug", "grade-b1", "median-b1", "Total"]
    assert main(["diversity", "--metric", "invariant", "--out", out]) == 0
    assert main(["diversity", "--metric", "testgen", "--bug", "median-b1", "--budget", "40",
                 "--out", out]) == 0
    assert list((tmp_path / "diversity" / "median-b1").glob("*/suite.txt"))
    div = json.loads((tmp_path / "reports" / "diversity.json").read_text())
    assert {(d["bug"], d["metric"]) for d in div} >= {("grade-b1", "invariant"), ("median-b1", "testgen")}
    before = {p.name: p.read_bytes() for p in (tmp_path / "reports").iterdir()}
    assert main(["report", "--out", out]) == 0
    after = {p.name: p.read_bytes() for p in (tmp_path / "reports").iterdir()}
    assert before == after
    capsys.readouterr()
    assert main(["stats", "--out", out]) == 0
    assert "pooled" in capsys.readouterr().out


def test_missing_run_records_are_listed(tmp_path, capsys):
    rc = main(["evaluate", "--bug", "median-b1", "--seeds", "0..1", "--out", str(tmp_path)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "seed0.json" in err and "seed1.json" in err


def test_stats_headline(capsys):
    assert main(["stats", "12", "13", "13", "13"]) == 0
    out = capsys.readouterr().out
    assert "p = " in out and "not significant at 0.05" in out
    assert main(["stats", "1", "2", "3"]) == 1


def test_diversity_single_patch_gives_zero(tmp_path, capsys):
    from divrepair.search import RunRecord
    out = tmp_path
    main(["repair", "--bug", "median-b1", "--technique", "genprog", "--seed", "0", "--out", str(out)])
    path = out / "runs" / "median-b1" / "genprog" / "seed0.json"
    rec = RunRecord.loads(path.read_text())
    keep = rec.post_init_patches()[:1]
    rec.patches = keep
    path.write_text(rec.dumps())
    capsys.readouterr()
    assert main(["diversity", "--bug", "median-b1", "--technique", "genprog", "--out", str(out)]) == 0
    assert "n=1  mean=0" in capsys.readouterr().out


def test_config_defaults_and_round_trip(tmp_path, capsys):
    assert main(["config", "--defaults"]) == 0
    text = capsys.readouterr().out
    assert RunConfig.loads(text) == RunConfig()
    cfg = RunConfig(pop_size=12, diversity_weight=0.25, technique="genprog", bug="mean-b1", seed=4)
    path = tmp_path / "run.ini"
    cfg.save(path)
    assert RunConfig.load(path) == cfg
    assert main(["config", "--config", str(path), "--write", str(tmp_path / "copy.ini")]) == 0
    assert RunConfig.load(tmp_path / "copy.ini") == cfg


def test_config_drives_repair(tmp_path):
    path = tmp_path / "run.ini"
    RunConfig(pop_size=4, max_generations=1, technique="genprog", bug="mean-b1", seed=5,
              out=str(tmp_path / "o")).save(path)
    main(["repair", "--config", str(path)])
    rec = json.loads((tmp_path / "o" / "runs" / "mean-b1" / "genprog" / "seed5.json").read_text())
    assert rec["config"]["pop_size"] == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "divrepair", "stats", "12", "13", "13", "13"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "not significant" in res.stdout


# -- corpus -------------------------------------------------------------------------------

def test_validate_corpus(capsys):
    assert main(["validate-corpus"]) == 0
    out = capsys.readouterr().out
    assert out.count(": ok") == len(bundled_ids()) >= 6


def test_broken_bundle_is_rejected(tmp_path, capsys):
    bundle = tmp_path / "fixed"
    shutil.copytree(CORPUS_DIR / "median-b1", bundle)
    shutil.copy(bundle / "reference.mini", bundle / "program.mini")
    with pytest.raises(BundleError):
        load_bug(bundle)
    assert main(["validate-corpus", "--bug", str(bundle)]) == 1
    assert "passes every white-box test" in capsys.readouterr().out


def test_bundles_keep_suites_apart(bugs):
    for bug in bugs.values():
        assert bug.whitebox and bug.blackbox
        assert {t.origin for t in bug.whitebox} == {"whitebox"}
        assert {t.origin for t in bug.blackbox} == {"blackbox"}
