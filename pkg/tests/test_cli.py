import json
import subprocess
import sys

import pytest

from isotower.cli import main

BASE = ["--q", "5", "--l", "2", "--p", "3"]


def run(*args):
    return main([str(a) for a in args])


def load(path):
    data = json.loads(path.read_text())
    assert data["schema"] == 1
    return data


def test_build_is_deterministic(tmp_path):
    a = tmp_path / "a"
    assert run("build", *BASE, "--n", 1, "--out-dir", a) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["level_0.dot", "level_1.dot", "manifest.json"]
    first = {name: (a / name).read_bytes() for name in names}
    assert run("build", *BASE, "--n", 1, "--out-dir", a) == 0
    assert first == {name: (a / name).read_bytes() for name in names}
    m = load(a / "manifest.json")
    assert m["k"] == 2  # 3 | 5 + 1
    assert "digraph" in (a / "level_1.dot").read_text()


def test_audit_selected_theorems(tmp_path):
    assert run("audit", *BASE, "--n", 1, "--theorem", "thm41", "--theorem", "cor210", "--out-dir", tmp_path) == 0
    r = load(tmp_path / "audit.json")["results"]
    assert r["thm41"]["verdict"] == "pass" and r["cor210"]["verdict"] == "pass"
    assert "prop53" not in r


def test_y_tower(tmp_path):
    assert run("y-tower", *BASE, "--n", 1, "--out-dir", tmp_path) == 0
    r = load(tmp_path / "y_tower.json")
    assert (tmp_path / "y_level_1.dot").exists() and r["command"] == "y-tower"


@pytest.mark.parametrize("args", [["build", "--q", "5", "--l", "3", "--p", "3"],
                                  ["build", "--q", "6", "--l", "2", "--p", "3"],
                                  ["build", "--q", "5", "--l", "2"],
                                  ["frobnicate"],
                                  ["volcano", "gen", "--tectonic", "4,1,1,2"],
                                  ["density", "--p", "3", "--N", "3"]])
def test_bad_parameters_exit_2(tmp_path, args):
    assert run(*args, "--out-dir", tmp_path) == 2 if args[0] != "frobnicate" else run(*args) == 2


def test_cap_exceeded_exit_3(tmp_path):
    assert run("build", *BASE, "--n", 2, "--cap-field", 100, "--out-dir", tmp_path) == 3


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ISOTOWER_THREADS", "x")
    assert run("volcano", "gen", "--out-dir", tmp_path) == 2


def test_density(tmp_path):
    assert run("density", "--p", 3, "--bound", 20000, "--out-dir", tmp_path) == 0
    r = load(tmp_path / "density.json")
    assert abs(r["value"] - 0.3333) < 0.02


def test_volcano_gen_and_recognize(tmp_path, capsys):
    assert run("volcano", "gen", "--tectonic", "5,1,1,2", "--out-dir", tmp_path) == 0
    dot = tmp_path / "tectonic_5_1_1_2.dot"
    assert dot.exists() and (tmp_path / "tectonic_5_1_1_2.json").exists()
    assert run("volcano", "recognize", "--class", "tectonic_crater", dot, "--out-dir", tmp_path) == 0
    assert "(5,1,1,2)" in capsys.readouterr().out
    assert load(tmp_path / "recognize.json")["verdict"] == "yes"

    assert run("volcano", "gen", "--tectonic", "3,1,2,1", "--intertwine", "--out-dir", tmp_path) == 0
    src = tmp_path / "tectonic_3_1_2_1_pm.json"
    assert run("volcano", "recognize", "--class", "double_intertwinement", src, "--out-dir", tmp_path) == 0
    # a negative verdict is an answer, not an error
    assert run("volcano", "recognize", "--class", "crater", src, "--out-dir", tmp_path) == 0
    assert load(tmp_path / "recognize.json")["verdict"] == "no"

    assert run("volcano", "gen", "--l", 3, "--crater", "isolated:4", "--depth", 2, "--out-dir", tmp_path) == 0
    vol = tmp_path / "volcano_isolated4_l3_D2.dot"
    assert run("volcano", "recognize", "--class", "volcano", "--depth", 2, vol, "--out-dir", tmp_path) == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "isotower", "volcano", "gen", "--crater", "cycle:4",
                           "--depth", "1", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert any(p.suffix == ".dot" for p in tmp_path.iterdir())
