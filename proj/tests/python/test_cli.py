import os
import subprocess
from pathlib import Path

import pytest

CONFIG_DIR = Path(os.environ.get("PSR_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))
PSR_PLAN = os.environ.get("PSR_PLAN")

pytestmark = pytest.mark.skipif(not PSR_PLAN, reason="PSR_PLAN not set")


def cli(*args):
    return subprocess.run([PSR_PLAN, *map(str, args)], capture_output=True, text=True)


def test_run_then_eval(tmp_path):
    model = tmp_path / "model.json"
    out = tmp_path / "curve.csv"
    r = cli("run", "-q", "--config", CONFIG_DIR / "tiger.ini", "--episodes", 30, "--sims", 50,
            "--save-model", model, "--out", out)
    assert r.returncode == 0, r.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == "episode,return,discounted_return,length,epsilon,rank,resets,ms"
    assert len(lines) == 31
    r = cli("eval", "--model", model, "--env", "tiger", "--episodes", 3, "--sims", 50)
    assert r.returncode == 0, r.stderr
    assert len(r.stdout.splitlines()) >= 4


def test_oracle_check():
    r = cli("oracle-check", "--env", "tiger", "--episodes", 300, "--queries", 100)
    assert r.returncode == 0, r.stderr
    fields = dict(line.split() for line in r.stdout.splitlines())
    assert int(fields["queries"]) == 100
    assert float(fields["mean_l1"]) >= 0.0


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nenv = tiger\nnot_a_key = 3\n")
    assert cli("run", "--config", bad).returncode == 1
    assert cli("run", "--config", tmp_path / "missing.ini").returncode == 1
    assert cli("oracle-check", "--env", "rocksample", "--episodes", 5).returncode == 1
    assert cli("eval", "--model", tmp_path / "missing.json", "--env", "tiger", "--episodes", 1).returncode == 2
    assert cli("no-such-command").returncode == 1
