import csv
import json
from pathlib import Path

import pytest

from demforge.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY, main
from demforge.io import METRICS_HEADER, SNAPSHOT_HEADER, read_snapshot

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def small_config(tmp_path, extra="", steps=5):
    text = (CONFIGS / "verify.cfg").read_text()
    text = text.replace("run.warmup_steps = 400", "run.warmup_steps = 20")
    text = text.replace("run.steps = 100", f"run.steps = {steps}")
    path = tmp_path / "small.cfg"
    path.write_text(text + extra)
    return path


def test_run_writes_snapshots_and_metrics(tmp_path):
    cfg = small_config(tmp_path, "run.snapshot_every = 2\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out-dir", str(out)]) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["metrics.csv"] + [f"snapshot_{s:08d}.csv" for s in (0, 2, 4, 5)]
    with open(out / "snapshot_00000005.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SNAPSHOT_HEADER
    assert len(rows) == 513 and all(len(r) == 11 for r in rows)
    with open(out / "metrics.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == METRICS_HEADER
    assert len(rows) == 1 + 5 * 9


def test_zero_steps_gives_initial_snapshot_only(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(small_config(tmp_path)), "--out-dir", str(out), "--steps", "0"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["metrics.csv", "snapshot_00000000.csv"]


def test_same_seed_twice_is_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["run", str(cfg), "--out-dir", str(o), "--seed", "3"]) == 0
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "c"), "--seed", "4"]) == 0
    assert (tmp_path / "c" / "snapshot_00000000.csv").read_bytes() != \
        (outs[0] / "snapshot_00000000.csv").read_bytes()


def test_variants_write_identical_files(tmp_path):
    cfg = small_config(tmp_path)
    for v in ("baseline", "two_phase"):
        assert main(["run", str(cfg), "--out-dir", str(tmp_path / v), "--variant", v]) == 0
    for f in ("snapshot_00000005.csv", "metrics.csv"):
        assert (tmp_path / "baseline" / f).read_bytes() == (tmp_path / "two_phase" / f).read_bytes()


def test_head_on_snapshots_reproduce_restitution(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "headon.cfg"), "--out-dir", str(out)]) == 0
    first = read_snapshot(out / "snapshot_00000000.csv")
    last = read_snapshot(out / "snapshot_00000800.csv")
    v0 = first["vel"][1, 0] - first["vel"][0, 0]
    v1 = last["vel"][1, 0] - last["vel"][0, 0]
    assert 0.855 <= -v1 / v0 <= 0.945
    with open(out / "metrics.csv") as fh:
        touching = sum(1 for r in csv.DictReader(fh) if r["kernel"] == "Collide" and r["contacts"] != "0")
    assert touching >= 200


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text((CONFIGS / "minimal.cfg").read_text() + "gravty.x = 1\n")
    assert main(["run", str(bad), "--out-dir", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "gravty.x" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_runtime_abort_exit_code(tmp_path, capsys):
    snap = tmp_path / "two.csv"
    snap.write_text(",".join(SNAPSHOT_HEADER) + "\n0,1,1,1,0,0,0,0,0,0,1\n1,1,1,1,0,0,0,0,0,0,1\n")
    cfg = tmp_path / "c.cfg"
    cfg.write_text((CONFIGS / "headon.cfg").read_text().replace("headon_init.csv", str(snap)))
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "o")]) == EXIT_RUNTIME
    err = capsys.readouterr().err
    assert "Collide" in err and "coincident" in err


def test_threads_env_is_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("DEMFORGE_THREADS", "many")
    assert main(["run", str(CONFIGS / "minimal.cfg"), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    monkeypatch.setenv("DEMFORGE_THREADS", "1")
    assert main(["run", str(CONFIGS / "minimal.cfg"), "--out-dir", str(tmp_path), "--steps", "1"]) == 0


def test_verify_passes_on_default_config(capsys):
    assert main(["verify", str(CONFIGS / "verify.cfg")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 6 and "[FAIL]" not in out


def test_verify_reports_undersized_cell(tmp_path, capsys):
    cfg = small_config(tmp_path, "grid.cell_size = 1.2\n")
    assert main(["verify", str(cfg)]) == EXIT_VERIFY
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if "contact completeness" in l)
    assert line.startswith("[FAIL]") and "cell size 1.2 < 2*r_max" in line


def test_bench_report(tmp_path, capsys):
    cfg = small_config(tmp_path)
    assert main(["bench", str(cfg), "--out-dir", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "bench.json").read_text())
    assert rep["particles"] == 512
    assert rep["sparse"]["modeled_speedup"] == pytest.approx(1.0, abs=0.05)
    assert rep["dense"]["steps"] == 5
    assert "Collide[baseline]" in rep["dense"]["wall_ns_mean"]
    assert "modeled speedup" in capsys.readouterr().out
