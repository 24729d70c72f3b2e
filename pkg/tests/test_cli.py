import json
import math
import os
import re
from pathlib import Path

import numpy as np
import pytest

from realrmt import cli
from realrmt.eigen import ConvergenceError
from realrmt.recipes import RECIPES

ROOT = Path(__file__).resolve().parents[1]

RUN = ["run", "--ensemble", "rsym", "--n", "30", "--N", "60", "--seed", "7", "--fit", "PAB,Poisson",
       "--reference", "wigner"]


def _files(d: Path) -> dict:
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def _manifest(d: Path) -> dict:
    m = json.loads((d / "manifest.json").read_text())
    m.pop("wall_time_s")
    return m


def _data_files(d: Path) -> dict:
    return {k: v for k, v in _files(d).items() if not k.endswith("manifest.json")}


# --- run -------------------------------------------------------------------------------


def test_run_writes_outputs(tmp_path):
    assert cli.main(RUN + ["--out", str(tmp_path)]) == 0
    names = set(_files(tmp_path))
    assert {"histogram.csv", "fit.txt", "manifest.json", "curve_PAB.csv", "curve_reference.csv"} <= names
    assert (tmp_path / "histogram.csv").read_text().splitlines()[0] == "bin_left,bin_right,density,count"
    assert (tmp_path / "curve_PAB.csv").read_text().splitlines()[0] == "s,p"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "ok" and man["seed"] == 7
    assert man["config"]["n"] == 30 and man["config"]["N"] == 60
    assert {"skipped_matrices", "wall_time_s", "n_outside_range"} <= set(man)
    hist = np.loadtxt(tmp_path / "histogram.csv", delimiter=",", skiprows=1)
    assert hist.shape == (50, 4)


def test_run_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert cli.main(RUN + ["--out", str(a)]) == 0
    assert cli.main(RUN + ["--out", str(b)]) == 0
    assert _data_files(a) == _data_files(b)
    assert _manifest(a) == _manifest(b)


def test_parallel_equals_serial(tmp_path):
    a, b = tmp_path / "serial", tmp_path / "parallel"
    a.mkdir(), b.mkdir()
    base = ["run", "--ensemble", "tsym", "--n", "40", "--N", "100", "--seed", "3"]
    assert cli.main(base + ["--workers", "1", "--out", str(a)]) == 0
    assert cli.main(base + ["--workers", "3", "--out", str(b)]) == 0
    assert (a / "histogram.csv").read_bytes() == (b / "histogram.csv").read_bytes()


def test_missing_out_dir_exit_2(tmp_path):
    missing = tmp_path / "nope"
    assert cli.main(RUN + ["--out", str(missing)]) == 2
    assert not missing.exists()
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize(
    "extra",
    [
        ["--ensemble", "nosuch"],
        ["--pdf", "cauchy"],
        ["--stat", "complex"],  # symmetric family has no complex pairs
        ["--fit", "NoModel"],
        ["--range", "2,1"],
        ["--scaling", "sideways"],
    ],
)
def test_invalid_config_exit_2(tmp_path, extra):
    argv = ["run", "--ensemble", "rsym", "--n", "10", "--N", "5"] + extra + ["--out", str(tmp_path)]
    assert cli.main(argv) == 2
    assert list(tmp_path.iterdir()) == []


def test_general_size_cap(tmp_path):
    argv = ["run", "--ensemble", "r", "--n", "300", "--N", "1", "--stat", "complex", "--out", str(tmp_path)]
    assert cli.main(argv) == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(cfg):
        raise ConvergenceError("no convergence after 30 sweeps")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(RUN + ["--out", str(tmp_path)]) == 3
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "failed"
    assert "ConvergenceError" in man["error"]
    assert man["config"]["seed"] == 7


def test_rerun_from_manifest(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert cli.main(RUN + ["--out", str(a)]) == 0
    assert cli.main(["rerun", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert _data_files(a) == _data_files(b)
    assert _manifest(a) == _manifest(b)


def test_rerun_bad_manifest(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{not json")
    assert cli.main(["rerun", "--manifest", str(bad), "--out", str(tmp_path)]) == 2


# --- analytic2x2 -------------------------------------------------------------------------


def test_analytic_r2_uniform_support(tmp_path):
    assert cli.main(["analytic2x2", "--matrix", "r2", "--pdf", "uniform", "--grid", "800", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    curve = np.loadtxt(tmp_path / "curve.csv", delimiter=",", skiprows=1)
    edge = math.sqrt(2) / man["S_bar"]
    assert np.all(curve[curve[:, 0] > edge + 1e-12, 1] == 0)
    assert np.all(curve[:, 1] >= 0)
    assert np.all(curve[(curve[:, 0] > 0) & (curve[:, 0] < edge * 0.99), 1] > 0)
    assert abs(man["alpha"] - 1.01) < 0.1


def test_analytic_gaussian_refused(tmp_path):
    assert cli.main(["analytic2x2", "--matrix", "r1", "--pdf", "gaussian", "--out", str(tmp_path)]) == 2
    assert list(tmp_path.iterdir()) == []


def test_analytic_unsupported_pair(tmp_path):
    assert cli.main(["analytic2x2", "--matrix", "r1", "--pdf", "maxwellian", "--out", str(tmp_path)]) == 2


def test_analytic_maxwellian_superlinear(tmp_path):
    assert cli.main(["analytic2x2", "--matrix", "r2", "--pdf", "maxwellian", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["alpha"] is None
    assert man["behaviour"] == "super-linear"
    assert abs(man["order"] - 3) < 0.05
    assert "super-linear" in (tmp_path / "alpha.txt").read_text()


def test_analytic_mc_overlay_and_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    argv = ["analytic2x2", "--matrix", "r2", "--pdf", "exponential", "--mc", "20000", "--seed", "5", "--out", str(a)]
    assert cli.main(argv) == 0
    assert "mc_histogram.csv" in _files(a)
    assert cli.main(["rerun", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert _data_files(a) == _data_files(b)


# --- recipes -------------------------------------------------------------------------------


def test_recipes_list(capsys):
    assert cli.main(["recipes", "list"]) == 0
    out = capsys.readouterr().out
    listed = [line.split(":")[0] for line in out.splitlines() if line and not line.startswith(" ")]
    assert listed == list(RECIPES)


def test_recipe_names_cover_tables_and_figures():
    assert set(RECIPES) == {f"table{k}" for k in range(1, 5)} | {f"fig{k}" for k in range(1, 12)}


def test_readme_cookbook_matches_registry():
    text = (ROOT / "README.md").read_text()
    section = text.split("## Recipe cookbook", 1)[1].split("\n## ", 1)[0]
    rows = re.findall(r"^\| `([a-z0-9]+)` \|", section, flags=re.M)
    assert rows == list(RECIPES)


def test_table1_preset_expansion():
    jobs = [j for j in RECIPES["table1"].jobs if j.pdf == "gaussian"]
    assert sorted(j.config.ensemble for j in jobs) == ["rsym", "rsym_direct"]
    for j in jobs:
        c = j.config
        assert (c.n, c.N, c.stat, c.fit) == (100, 1000, "nlm", ("PAB",))


def test_recipe_table1_gaussian(tmp_path):
    assert cli.main(["recipes", "run", "table1", "--pdf", "G", "--out", str(tmp_path)]) == 0
    fit = (tmp_path / "fit.txt").read_text()
    for label in ("table1/rsym/gaussian", "table1/rsym_direct/gaussian"):
        block = fit.split(f"[{label}]", 1)[1].split("\n[", 1)[0]
        assert "model: PAB" in block
        assert re.search(r"^param.A: ", block, flags=re.M) and re.search(r"^param.B: ", block, flags=re.M)
    for sub in ("rsym", "rsym_direct"):
        assert (tmp_path / "table1" / sub / "gaussian" / "histogram.csv").exists()


def test_recipe_rerun_reduced(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    argv = ["recipes", "run", "table3", "--pdf", "G", "--only", "toeplitz", "--n", "40", "--N", "50", "--out", str(a)]
    assert cli.main(argv) == 0
    assert cli.main(["rerun", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert _data_files(a) == _data_files(b)


def test_recipe_errors(tmp_path):
    assert cli.main(["recipes", "run", "table9", "--out", str(tmp_path)]) == 2
    assert cli.main(["recipes", "run", "table1", "--only", "zzz", "--out", str(tmp_path)]) == 2
    assert cli.main(["recipes", "run", "table1", "--out", str(tmp_path / "missing")]) == 2
    assert list(tmp_path.iterdir()) == []
