import json
import math
import sys

import pytest

from linnik_lab import cli


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_factor(capsys):
    code, out, _ = run_cli(capsys, "factor", "--n", "12")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "linnik-lab/1"
    assert data["result"]["factors"] == [[2, 2], [3, 1]]
    assert "audit" in data and "params" in data


def test_rfunc_example(capsys):
    code, out, _ = run_cli(capsys, "rfunc", "--h", "liouville", "--q", "3",
                           "--cap", "1000")
    assert code == 0
    data = json.loads(out)
    assert data["result"]["R"] == 14
    assert data["result"]["witnesses"]["2"]["+"] == 14
    assert data["result"]["witnesses_verified"] is True


def test_pretend_example(capsys):
    code, out, _ = run_cli(capsys, "pretend", "--h", "liouville", "--q", "4",
                           "--cutoff", "10", "--chi", "principal")
    assert code == 0
    data = json.loads(out)
    assert data["result"]["sum"] == pytest.approx(0.676190476, abs=1e-6)


def test_exit_codes(capsys, monkeypatch):
    code, _, err = run_cli(capsys, "frobnicate")
    assert code == 1
    code, _, err = run_cli(capsys, "lofq", "--q", "2")
    assert code == 2 and "precondition" in err
    # resource error path: a sieve too large to enumerate
    from linnik_lab import sieve
    monkeypatch.setattr(sieve, "_SUPPORT_BUDGET", 100)
    code, _, err = run_cli(capsys, "sieve", "--z", "100", "--D", "1e30")
    assert code == 3 and "resource" in err
    code, _, _ = run_cli(capsys)
    assert code == 1


def test_determinism(capsys):
    args = ("charsum", "mvt", "--q", "101", "--N", "300", "--seed", "7")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_out_file(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, err = run_cli(capsys, "factor", "--n", "9991", "--out", str(out_path))
    assert code == 0 and out == ""
    data = json.loads(out_path.read_text())
    assert data["result"]["factors"] == [[97, 1], [103, 1]]


def test_cache_cold_warm_and_corrupt(tmp_path, capsys):
    # each run_cli models a separate process: drop the in-memory group memo
    from linnik_lab import group as g
    cache_args = ("--cache", str(tmp_path))
    g._group_cache.pop(1009, None)
    code, out1, err1 = run_cli(capsys, "charsum", "mvt", "--q", "1009", *cache_args)
    assert code == 0
    g._group_cache.pop(1009, None)
    code, out2, err2 = run_cli(capsys, "charsum", "mvt", "--q", "1009", *cache_args)
    assert code == 0
    assert out1 == out2  # cold then warm: identical report
    assert "cache: hit chartable-q1009" in err2
    # a second subcommand reuses the same keyed entry
    g._group_cache.pop(1009, None)
    code, _, err3 = run_cli(capsys, "rfunc", "--q", "1009", "--cap", "40000", *cache_args)
    assert code == 0 and "cache: hit chartable-q1009" in err3
    # the prime sieve is cached keyed by range and validated on reuse
    assert (tmp_path / "primes-2018.json").exists()
    data = json.loads((tmp_path / "primes-2018.json").read_text())
    assert data["primes"][0] == 2 and data["primes"][-1] == 2017
    # corruption: recompute, warn, still correct
    for f in tmp_path.iterdir():
        f.write_text("{broken")
    g._group_cache.pop(1009, None)
    code, out3, err4 = run_cli(capsys, "charsum", "mvt", "--q", "1009", *cache_args)
    assert code == 0 and "corrupt" in err4
    assert out3 == out1
    # a structurally valid but wrong prime table is rejected as corrupt
    (tmp_path / "primes-2018.json").write_text(
        json.dumps({"limit": 2018, "primes": [2, 3, 5, 9]}))
    g._group_cache.pop(1009, None)
    code, _, err5 = run_cli(capsys, "charsum", "mvt", "--q", "1009", *cache_args)
    assert code == 0 and "corrupt entry primes-2018" in err5


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": "linnik-lab/1",
                               "rfunc": {"q": 3, "cap": 1000}}))
    # required flags may come entirely from the config file
    code, out, _ = run_cli(capsys, "--config", str(cfg), "rfunc")
    assert code == 0
    assert json.loads(out)["result"]["R"] == 14
    # flags on the command line win over the file
    code, out, _ = run_cli(capsys, "--config", str(cfg), "rfunc", "--q", "5")
    assert code == 0
    assert json.loads(out)["result"]["q"] == 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": "other/9"}))
    code, _, err = run_cli(capsys, "--config", str(bad), "factor", "--n", "4")
    assert code == 2
    code, _, err = run_cli(capsys, "rfunc", "--q", "3")
    assert code == 1 and "--cap" in err


def test_more_subcommands_smoke(capsys):
    checks = [
        (("esets", "--q", "3", "--x", "14"), lambda d: d["result"]["both_full"]),
        (("distance", "--f", "liouville", "--g", "one", "--x", "10"),
         lambda d: abs(d["result"]["distance"] - 1.53375) < 1e-4),
        (("lofq", "--q", "4"), lambda d: abs(d["result"]["L"] - 3 / math.pi) < 1e-6),
        (("sieve", "--z", "30", "--D", "1000"), lambda d: d["result"]["max_abs"] <= 1),
        (("rough", "--q", "5", "--cap", "20", "--z", "2", "--psi", "0", "--b", "2"),
         lambda d: d["result"]["count"] == 8),
        (("kneser", "--q", "24", "--trials", "50"), lambda d: d["result"]["all_pass"]),
        (("triple", "--q", "101", "--trials", "5", "--seed", "1"),
         lambda d: sum(d["result"]["outcomes"].values()) == 5),
        (("ladder", "--Q1", "10", "--q", "101", "--overrides", "10:100", "--n", "77"),
         lambda d: d["result"]["in_S"] is True),
        (("ramare", "--q", "35", "--Q1", "10", "--M", "600", "--overrides", "10:100"),
         lambda d: d["result"]["identity_holds"]),
        (("charsum", "pv", "--q", "101"), lambda d: d["result"]["bound"] > 0),
        (("charsum", "large", "--q", "101", "--P", "500"),
         lambda d: d["result"]["lhs"] >= 0),
        (("charsum", "amplify", "--q", "101"), lambda d: d["result"]["lhs"] >= 0),
        (("charsum", "halmon", "--q", "101", "--N", "300"),
         lambda d: d["result"]["lhs"] >= 0),
        (("charsum", "moments", "--q", "35", "--N", "2000"),
         lambda d: d["result"]["squares"]["lhs"] >= 0),
        (("stcompare", "--q", "35", "--a", "1"), lambda d: d["result"]["lhs"] >= 0),
        (("audit", "--q", "3", "--Q1", "10"),
         lambda d: d["result"]["verdict"] in ("branch1", "both")),
        (("densemodel", "--q", "101", "--R", "101"),
         lambda d: d["result"]["models"]["plus"]["verify"]["asserted"]["ii"]),
        (("batch", "--qmin", "3", "--qmax", "8"),
         lambda d: len(d["result"]["table"]) == 6),
    ]
    for argv, check in checks:
        code, out, err = run_cli(capsys, *argv)
        assert code == 0, (argv, err)
        assert check(json.loads(out)), argv


def test_batch_csv(capsys):
    code, out, _ = run_cli(capsys, "--format", "csv", "batch", "--qmin", "3",
                           "--qmax", "6")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("q,")
    assert len(lines) == 5


def test_batch_threads_matches_serial(capsys):
    serial = run_cli(capsys, "batch", "--qmin", "3", "--qmax", "10")
    parallel = run_cli(capsys, "batch", "--qmin", "3", "--qmax", "10",
                       "--threads", "2")
    assert serial[0] == parallel[0] == 0
    assert json.loads(serial[1])["result"] == json.loads(parallel[1])["result"]
