import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nnmcoop.cli import main
from nnmcoop.config import ConfigError, ExperimentConfig


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def read_table(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]} if rows else {}


def snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


def test_config_parsing(tmp_path):
    cfg = ExperimentConfig().updated(ExperimentConfig.parse_text(
        "# comment\nlambda = 0.5  # inline\nschemes = NC, OF2(0.3)\nmaster_seed=9\n"))
    assert cfg.lam == 0.5 and cfg.seed == 9 and cfg.schemes == ("NC", "OF2(0.3)")
    with pytest.raises(ConfigError):
        ExperimentConfig().updated({"bogus": "1"})
    with pytest.raises(ConfigError):
        ExperimentConfig().updated({"lam": "abc"})
    with pytest.raises(ConfigError):
        ExperimentConfig().updated({"beta": "1.5"})
    with pytest.raises(ConfigError):
        ExperimentConfig.parse_text("no equals sign")
    a = ExperimentConfig().updated({"threads": "8", "out": "elsewhere"})
    assert a.config_hash() == ExperimentConfig().config_hash()
    assert ExperimentConfig().updated({"seed": "1"}).config_hash() != ExperimentConfig().config_hash()


def test_sample_outputs(tmp_path):
    code, out = run(tmp_path, "sample", "--seed", "4", "--set", "replications=3", "--set", "lam=0.5")
    assert code == 0
    pats = sorted(out.glob("pattern_*.csv"))
    assert len(pats) == 3 and len(list(out.glob("grouping_*.csv"))) == 3
    metas = [json.loads(Path(str(p) + ".json").read_text()) for p in pats]
    assert [m["seed"]["stream_id"] for m in metas] == [0, 1, 2]
    assert metas[0]["meta"]["config_hash"] in pats[0].read_text().splitlines()[0]
    code, out = run(tmp_path, "sample", "--set", "lam=0", "--set", "replications=1", name="empty")
    lines = (out / "pattern_0000.csv").read_text().splitlines()
    assert code == 0 and lines[0].startswith("# nnmcoop") and lines[1:] == ["index,x,y"]
    assert (out / "grouping_0000.csv").read_text().splitlines()[1:] == ["index,class,partner1,partner2"]


def test_sample_byte_identical(tmp_path):
    args = ["sample", "--seed", "7", "--set", "k=3"]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, "--threads", "8", name="b")
    assert snapshot(a) == snapshot(b)


STATS = ["stats", "--seed", "3", "--set", "replications=100", "--set", "width=25", "--set", "height=25",
         "--set", "n_probes=500", "--set", "ks_boot=99", "--set", "n_radii=16"]


def test_stats_outputs_and_determinism(tmp_path):
    code, a = run(tmp_path, *STATS, "--threads", "1", name="a")
    assert code == 0
    summary = json.loads((a / "summary.json").read_text())
    assert 0.61 <= summary["class_fractions"]["frac_paired"] <= 0.63
    g = read_table(a / "G_pairs.csv")
    assert np.max(np.abs(g["value"] - g["analytic"])) < 0.03
    j = read_table(a / "J_singles.csv")
    assert np.all(j["value"] > 1)
    ks = json.loads((a / "ks_singles.json").read_text())
    assert set(ks) == {"meta", "statistic", "p_value", "n"}
    code, b = run(tmp_path, *STATS, "--threads", "8", name="b")
    assert code == 0 and snapshot(a) == snapshot(b)


def test_interference_outputs(tmp_path):
    code, out = run(tmp_path, "interference", "--set", "replications=20", "--set", "observers=5",
                    "--set", "R_grid=1,3", "--set", "schemes=NC,OF1,PH")
    assert code == 0
    t = read_table(out / "interference.csv")
    assert np.all(t["i2_NC_quad"] >= t["i2_OF1_quad"])
    assert np.array_equal(t["i2_NC_quad"], t["i2_PH_quad"])
    assert np.all(t["i1_quad"] <= t["i1_quad_plane"])
    assert t["R"].tolist() == [1.0, 3.0]


def test_laplace_outputs(tmp_path):
    code, out = run(tmp_path, "laplace", "--set", "mc_samples=2000", "--set", "lt_samples=2000",
                    "--set", "s_grid=0,1", "--set", "dump_samples=true")
    assert code == 0
    t = read_table(out / "laplace_singles.csv")
    assert t["series"][0] == 1.0 and t["empirical"][0] == 1.0
    diag = json.loads((out / "laplace_diagnostics.json").read_text())
    assert diag["poisson_tail"] < 1e-6 and diag["n_max"] == 12
    d = read_table(out / "samples_NC.csv")
    assert len(d["rep"]) == 2000 and np.allclose(d["total"], d["i1"] + d["i2"])


def test_reproduce(tmp_path, capsys):
    code, out = run(tmp_path, "reproduce", "fig4c", "--set", "replications=10", "--set", "n_probes=500",
                    "--set", "width=30", "--set", "height=30")
    assert code == 0
    t = read_table(out / "fig4c_J_singles.csv")
    assert np.all(t["J"] > 1)
    code, _ = run(tmp_path, "reproduce", "fig99", name="bad")
    assert code == 2
    assert "fig6" in capsys.readouterr().err
    code, out = run(tmp_path, "reproduce", "fig3", name="f3")
    assert code == 0 and (out / "fig3_atoms.csv").exists()


def test_exit_codes(tmp_path):
    assert run(tmp_path, "sample", "--set", "lam=-1")[0] == 2
    assert run(tmp_path, "sample", "--set", "nonsense=1")[0] == 2
    assert run(tmp_path, "sample", "--config", str(tmp_path / "missing.cfg"))[0] == 2
    assert run(tmp_path, "stats", "--set", "margin=30")[0] == 2
    assert run(tmp_path, "laplace", "--set", "width=40", "--set", "height=40")[0] == 3
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["sample", "--set", "replications=1", "--out", str(blocker / "sub")]) == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("replications = 2\nlambda = 0.2\n")
    code, out = run(tmp_path, "sample", "--config", str(cfg))
    assert code == 0 and len(list(out.glob("pattern_*.csv"))) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nnmcoop", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("sample", "stats", "interference", "laplace", "reproduce"):
        assert cmd in res.stdout
