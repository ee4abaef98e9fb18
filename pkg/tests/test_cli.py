import csv
import json
import math
import os
import subprocess
import sys

import pytest

from finrig import cli
from finrig.cli import ExperimentConfig, main, run, validate
from finrig.errors import ConvergenceError

DOUBLING = {"family": "trig", "degree": 2, "coeffs": []}


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def read_tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            path = os.path.join(dirpath, name)
            with open(path, "rb") as fh:
                out[os.path.relpath(path, root)] = fh.read()
    return out


def test_equidist_example(tmp_path):
    cfg = ExperimentConfig(kind="equidist", map=DOUBLING, phi="x", n_min=3, n_max=12, out=str(tmp_path))
    assert run(cfg) == 0
    for row in read_csv(tmp_path / "equidist.csv"):
        N = int(row["N"])
        assert float(row["error"]) == pytest.approx(1 / (2 * (2 ** N - 1)), abs=1e-12)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert abs(summary["results"]["equidist"]["fit_error"]["lambda"] - 0.5) < 0.02


def test_conjugacy_example(tmp_path):
    cfg = ExperimentConfig(kind="conjugacy", base=DOUBLING, a=0.2, n_min=4, n_max=10, out=str(tmp_path))
    assert run(cfg) == 0
    res = json.loads((tmp_path / "summary.json").read_text())["results"]["conjugacy"]
    assert res["max_defect"] <= 1e-8
    assert res["c0_h"] <= 1e-4
    cols = list(read_csv(tmp_path / "conjugacy.csv")[0])
    assert cols == ["N", "cdf_error_f", "cdf_error_g", "c0_h", "c1_f", "defect"]


def test_cones_example(tmp_path):
    cfg = ExperimentConfig(kind="cones", theta=0.5, xi=0.75, M=0.0, n_max=10, out=str(tmp_path))
    assert run(cfg) == 0
    cert = json.loads((tmp_path / "summary.json").read_text())["results"]["cones"]["certificate"]
    assert cert["Delta"] == pytest.approx(2 * math.log(7), abs=1e-14)
    assert cert["tau"] == pytest.approx(0.75, abs=1e-15)


def test_validate_examples():
    codes = lambda cfg: [v.code for v in validate(cfg)]
    assert "enumeration-budget" in codes(ExperimentConfig(kind="periodic", map=DOUBLING, n_max=30))
    bad = {"family": "trig", "degree": 2, "coeffs": [1.0, 0.5]}
    assert "not-expanding" in codes(ExperimentConfig(kind="density", map=bad))
    assert validate(ExperimentConfig()) == []
    assert "unknown-kind" in codes(ExperimentConfig(kind="nope"))
    assert "malformed-config" in codes(ExperimentConfig(n_max=None))


def test_validation_exit_code(tmp_path, capsys):
    cfg = ExperimentConfig(kind="periodic", map=DOUBLING, n_max=30, out=str(tmp_path / "o"))
    assert run(cfg) == 2
    assert "enumeration-budget" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_nonconvergence_rolls_back(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise ConvergenceError("forced")

    monkeypatch.setitem(cli.RUNNERS, "equidist", boom)
    out = tmp_path / "o"
    assert run(ExperimentConfig(kind="suite", n_max=8, out=str(out))) == 3
    # density and periodic ran first; their files must be gone
    assert not out.exists() or read_tree(out) == {}


def test_suite_deterministic_and_documented(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        cfg = ExperimentConfig(kind="suite", n_min=3, n_max=8, grid=1024, out=str(out))
        assert run(cfg) == 0
        outs.append(out)
    ta, tb = read_tree(outs[0]), read_tree(outs[1])
    assert sorted(ta) == sorted(tb)
    for name in ta:
        if name != "summary.json":
            assert ta[name] == tb[name], name
    sa = json.loads(ta["summary.json"])
    sb = json.loads(tb["summary.json"])
    sa["config"].pop("out"), sb["config"].pop("out")
    assert sa == sb
    for rel, cols in sa["schema"].items():
        with open(outs[0] / rel) as fh:
            header = fh.readline().strip().split(",")
        assert set(header) == set(cols)
        assert all(cols.values())
    assert {"density", "periodic", "equidist", "conjugacy", "cones", "shift-exact"} <= set(sa["results"])
    assert "log.txt" in ta


def test_threads_do_not_change_output(tmp_path):
    trees = []
    for threads in (1, 3):
        out = tmp_path / str(threads)
        cfg = ExperimentConfig(kind="periodic", n_min=2, n_max=7, threads=threads, out=str(out))
        assert run(cfg) == 0
        tree = read_tree(out)
        tree.pop("summary.json")
        trees.append(tree)
    assert trees[0] == trees[1]


def test_gnuplot_files(tmp_path):
    cfg = ExperimentConfig(kind="shift-exact", n_min=2, n_max=6, gnuplot=True, out=str(tmp_path))
    assert run(cfg) == 0
    dat = (tmp_path / "shift.dat").read_text().splitlines()
    assert dat[0].startswith("# n periodic_sum")
    assert len(dat) == 6


def test_config_round_trip():
    cfg = ExperimentConfig(kind="cones", theta=0.4, xi=0.6, psi=[0.1, 0.2, 0.3], a=None)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(Exception):
        ExperimentConfig.from_dict({"kind": "suite", "bogus": 1})


def test_main_with_config_file(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"map": DOUBLING, "n_min": 2, "n_max": 20}))
    out = tmp_path / "o"
    assert main(["periodic", "--config", str(conf), "--nmax", "5", "--out", str(out)]) == 0
    rows = read_csv(out / "partition.csv")
    assert [int(r["count"]) for r in rows] == [3, 7, 15, 31]
    assert main(["periodic", "--config", str(tmp_path / "missing.json")]) == 2
    conf.write_text(json.dumps({"wrong": 1}))
    assert main(["periodic", "--config", str(conf)]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "o"
    proc = subprocess.run(
        [sys.executable, "-m", "finrig", "cones", "--nmax", "5", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "summary.json").exists()
