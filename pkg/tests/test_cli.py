import json

import numpy as np
import pytest

from opnorm.cli import main
from opnorm.mmio import write_matrix_market

PATH3 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)


def _kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def perm_file(tmp_path, perm2):
    path = tmp_path / "perm.mtx"
    write_matrix_market(path, perm2)
    return str(path)


def test_norm(perm_file, capsys, tmp_path):
    out = tmp_path / "norm.json"
    assert main(["norm", "--matrix", perm_file, "--r", "3", "--p", "2", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("gamma=1.122462")
    assert json.loads(out.read_text())["v"] == pytest.approx([2 ** (-1 / 3)] * 2)


def test_norm_reducible(tmp_path, capsys):
    path = tmp_path / "p3.mtx"
    write_matrix_market(path, PATH3)
    assert main(["norm", "--matrix", str(path), "--r", "2", "--p", "2"]) == 2
    kv = _kv(capsys.readouterr().out)
    assert kv["kind"] == "bipartite" and kv["witness"] == "0,2|1"


def test_norm_malformed(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("garbage\n")
    assert main(["norm", "--matrix", str(path), "--r", "2", "--p", "2"]) == 1


def test_norm_rejects_p_above_r(perm_file):
    assert main(["norm", "--matrix", perm_file, "--r", "2", "--p", "3"]) == 1


def test_config_flags_win(perm_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"matrix": perm_file, "r": 2, "p": 2}))
    assert main(["norm", "--config", str(cfg), "--r", "3"]) == 0
    assert _kv(capsys.readouterr().out)["r"] == "3.0"


def _clt_config(tmp_path, **extra):
    cfg = {"ensemble": {"family": "er", "n": 40, "mu": 0.4}, "seed": 3,
           "norm": {"r": 2, "p": 2}, "replicates": 2}
    cfg.update(extra)
    path = tmp_path / "clt.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_clt_smoke_and_rerun(tmp_path):
    cfg = _clt_config(tmp_path)
    assert main(["clt", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["clt", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "replicates.csv").read_bytes()
    assert a == (tmp_path / "b" / "replicates.csv").read_bytes()
    lines = a.decode().splitlines()
    assert len(lines) == 3 and lines[0].startswith("replicate,seed,n,r,p")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["replicates"] == 2 and len(summary["samples"]) == 2


def test_clt_threshold_failure_exit_code(tmp_path):
    cfg = _clt_config(tmp_path, thresholds={"mean": 0.0, "variance": 0.0, "ks_pvalue": 0.999})
    assert main(["clt", "--config", cfg, "--out", str(tmp_path / "t")]) == 4
    doc = json.loads((tmp_path / "t" / "summary.json").read_text())
    assert doc["thresholds_ok"]["mean"] is False


def test_clt_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"ensemble": {"family": "er", "n": 40, "mu": 1.0},
                                "norm": {"r": 2, "p": 2}, "replicates": 2}))
    assert main(["clt", "--config", str(path), "--out", str(tmp_path / "x")]) == 1
    assert "mu" in capsys.readouterr().err


def test_diagnose_mean_matrix(capsys):
    assert main(["diagnose", "--mean-matrix", "6", "--mu", "0.3", "--r", "3", "--p", "2"]) == 0
    kv = _kv(capsys.readouterr().out)
    assert float(kv["maximizer.linf_dist"]) <= 1e-15


def test_diagnose_triangle(tmp_path, capsys):
    path = tmp_path / "tri.mtx"
    write_matrix_market(path, np.ones((3, 3)) - np.eye(3))
    assert main(["diagnose", "--matrix", str(path), "--r", "2", "--p", "2"]) == 0
    assert _kv(capsys.readouterr().out)["irreducible"] == "true"


def test_diagnose_ensemble_has_all_reports(tmp_path, capsys):
    cfg = _clt_config(tmp_path)
    assert main(["diagnose", "--config", cfg]) == 0
    keys = _kv(capsys.readouterr().out)
    for prefix in ("regularity.", "maximizer.", "spectral."):
        assert any(k.startswith(prefix) for k in keys)


def test_grothendieck(perm_file, capsys):
    assert main(["grothendieck", "--matrix", perm_file, "--r", "4"]) == 0
    assert capsys.readouterr().out.startswith("M_r=1.414213")
    assert main(["grothendieck", "--matrix", perm_file, "--r", "1.5"]) == 1
    assert "r must be" in capsys.readouterr().err


def test_derivcheck(capsys):
    assert main(["derivcheck", "--n", "100", "--mu", "0.5", "--r", "2", "--p", "2"]) == 0
    kv = _kv(capsys.readouterr().out)
    assert float(kv["rel_err_grad"]) <= 0.02
