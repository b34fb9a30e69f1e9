import csv
import os
import shutil

import pytest

from relaybeam import cli, simulator

DEMO_CFG = os.path.join(os.path.dirname(__file__), os.pardir, "demos", "configs")


@pytest.fixture
def fig4(tmp_path):
    return shutil.copy(os.path.join(DEMO_CFG, "fig4.cfg"), tmp_path / "fig4.cfg")


QUICK = ["--trials", "1", "--snapshots", "3"]


def test_run_writes_fig4_csv(fig4, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(fig4), "--out", str(out), *QUICK]) == 0
    with open(out / "results.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == cli.CSV_HEADER
    body = rows[1:]
    assert len(body) == 15
    for alg in simulator.ALGORITHMS:
        mine = [r for r in body if r[0] == alg]
        assert [float(r[2]) for r in mine] == [1, 2, 3, 4, 5]
        assert all(r[1] == "pt_dbw" and r[4] == "1" and r[5] == "3" and r[6] == "1" for r in mine)
        assert all(len(r[3].replace("-", "").replace(".", "").lstrip("0")) <= 9 for r in mine)
    raw = (out / "results.csv").read_bytes()
    assert b"\r" not in raw
    dat = (out / "results.dat").read_text().splitlines()
    assert dat[0].startswith("# pt_dbw") and len(dat) == 6


def test_run_is_byte_identical(fig4, tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", "--config", str(fig4), "--out", str(tmp_path / d), *QUICK]) == 0
    assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()


def test_manifest_replay(fig4, tmp_path):
    out = tmp_path / "first"
    cli.main(["run", "--config", str(fig4), "--out", str(out), "--seed", "9", *QUICK])
    manifest = (out / "manifest.txt").read_text()
    for key in ("tool_version", "seed: 9", "started", "finished", "results.csv"):
        assert key in manifest
    assert cli.main(["run", "--config", str(out / "manifest.txt"), "--out", str(tmp_path / "again")]) == 0
    assert (out / "results.csv").read_bytes() == (tmp_path / "again/results.csv").read_bytes()


def test_missing_relay_count(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("K = 3\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "M" in capsys.readouterr().err


def test_bad_override_value(fig4, tmp_path, capsys):
    assert cli.main(["run", "--config", str(fig4), "--out", str(tmp_path), "--epsilon_max", "-1"]) == 2
    assert "epsilon_max" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_sweep_snr(tmp_path):
    cfg = shutil.copy(os.path.join(DEMO_CFG, "fig5.cfg"), tmp_path / "fig5.cfg")
    out = tmp_path / "o"
    assert cli.main(["sweep", "--config", str(cfg), "--axis", "snr_db", "--grid", "0:20:5",
                     "--out", str(out), *QUICK]) == 0
    rows = list(csv.reader(open(out / "results.csv", encoding="utf-8")))[1:]
    assert sorted({float(r[2]) for r in rows}) == [0, 5, 10, 15, 20]
    assert len(rows) == 15


def test_sweep_empty_grid(fig4, tmp_path):
    assert cli.main(["sweep", "--config", str(fig4), "--axis", "pt_dbw", "--grid", "",
                     "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit(fig4, tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise FloatingPointError("overflow")
    monkeypatch.setattr(simulator.beamformer, "solve_max_sinr", boom)
    monkeypatch.setenv("RELAYBEAM_THREADS", "1")
    assert cli.main(["run", "--config", str(fig4), "--out", str(tmp_path), *QUICK]) == 3
    assert "trial 0, snapshot 1" in capsys.readouterr().err


def test_validate_passes(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "projector idempotence" in out and "FAIL" not in out


def test_validate_fault_injection(capsys):
    assert cli.main(["validate", "--inject-fault", "projector"]) == 1
    assert "projector idempotence" in capsys.readouterr().out.split("FAILED:")[1]


def test_validate_literal_flag(capsys):
    assert cli.main(["validate", "--paper_literal_eq33", "true", "--pt_dbw", "3"]) == 1
    failed = capsys.readouterr().out.split("FAILED:")[1]
    assert "P_T placement consistency" in failed
    cli.main(["validate", "--paper_literal_eq33", "true", "--pt_dbw", "0"])
    failed = capsys.readouterr().out.split("FAILED:")[1]
    assert "P_T placement consistency" not in failed
