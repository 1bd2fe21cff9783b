from __future__ import annotations

import hashlib
import json
import subprocess
import sys

import pytest

from daffine.cli import main, read_config


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def _data(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}


def test_selftest_exit_zero(tmp_path):
    code, out = _run(tmp_path, "st", "selftest")
    assert code == 0
    lines = (out / "selftest.csv").read_text().splitlines()
    assert lines[0].startswith("# daffine")
    assert all(line.endswith(",1") for line in lines[2:])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "daffine.cli", "selftest", "--out", str(tmp_path / "x")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "FAIL" not in res.stdout


def test_walk_is_deterministic_and_independent_of_jobs(tmp_path):
    argv = ["walk", "--q", "2", "--mu", "biased:2/3", "--steps", "3000", "--chains", "3",
            "--seed", "42", "--trace-every", "500"]
    c1, a = _run(tmp_path, "a", *argv)
    c2, b = _run(tmp_path, "b", *argv)
    c3, c = _run(tmp_path, "c", *argv, "--jobs", "2")
    assert c1 == c2 == c3 == 0
    assert _data(a) == _data(b) == _data(c)
    assert {"chains.csv", "summary.csv", "trace_000.csv", "window_000.json"} <= set(_data(a))
    trace = (a / "trace_000.csv").read_text().splitlines()
    assert trace[0] == "# daffine 0.1.0 command=walk q=2 mu=biased:2/3 seed=42"
    assert trace[1].split(",")[:3] == ["n", "phi_w", "orbit_vertex"]


def test_manifest_hashes_files(tmp_path):
    code, out = _run(tmp_path, "f", "folner", "--r-max", "2")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "folner" and man["status"] == "ok"
    assert man["config"]["r_max"] == 2 and man["config"]["mu"] == "uniform-s0"
    for name, digest in man["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    rows = (out / "folner.csv").read_text().splitlines()
    assert rows[2].split(",")[:3] == ["1", "16", "1/4"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# folner run\nr-max = 1\nq = 2\nmu = uniform-s0\n")
    assert read_config(cfg) == {"r_max": 1, "q": 2, "mu": "uniform-s0"}
    code, out = _run(tmp_path, "cfg", "folner", "--config", str(cfg))
    assert code == 0
    assert len((out / "folner.csv").read_text().splitlines()) == 3
    code, out = _run(tmp_path, "flag", "folner", "--config", str(cfg), "--r-max", "2")
    assert code == 0
    assert len((out / "folner.csv").read_text().splitlines()) == 4


@pytest.mark.parametrize("argv", [
    ["walk", "--steps", "10"],                     # no seed
    ["bogus"],
    ["walk", "--seed", "1", "--mu", "uniform-s9"],
    ["walk", "--seed", "1", "--steps", "0"],
    ["metric", "--format", "xml"],
])
def test_usage_errors_exit_two(tmp_path, argv):
    code, out = _run(tmp_path, "bad", *argv)
    assert code == 2
    assert not out.exists()


def test_bad_config_exit_two(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, out = _run(tmp_path, "bad", "folner", "--config", str(cfg))
    assert code == 2 and not out.exists()


def test_resource_cap_exit_three_leaves_no_output(tmp_path):
    code, out = _run(tmp_path, "cap", "metric", "--radius", "6", "--max-elements", "100")
    assert code == 3
    assert not out.exists()


def test_metric_oracle_small(tmp_path):
    code, out = _run(tmp_path, "m", "metric", "--radius", "4", "--oracle", "--format", "dot")
    assert code == 0
    assert (out / "cayley.dot").read_text().startswith("digraph")
    text = (out / "spheres.csv").read_text()
    assert "1,8" in text


def test_schreier_and_embed_and_return_prob(tmp_path):
    code, out = _run(tmp_path, "s", "schreier", "--radius", "3")
    assert code == 0 and (out / "distances.csv").exists()
    code, out = _run(tmp_path, "e", "embed-check", "--radius", "3", "--pairs", "200", "--seed", "1")
    assert code == 0 and (out / "embed.csv").exists()
    code, out = _run(tmp_path, "r", "return-prob", "--n-max", "2", "--trials", "2000", "--seed", "3")
    assert code == 0
    exact = (out / "exact.csv").read_text().splitlines()
    assert exact[2].split(",")[:2] == ["0", "1/1"]
    code2, out2 = _run(tmp_path, "r2", "return-prob", "--n-max", "2", "--trials", "2000", "--seed", "3")
    assert _data(out) == _data(out2)
