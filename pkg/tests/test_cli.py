"""End-to-end runs of the ``ribnet`` command."""

import json

import numpy as np
import pytest

from ribnet.cli import main
from ribnet.datasets import dataset_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_verify_ok(capsys):
    code, out = run(capsys, "verify", "ds-n2-l1")
    assert code == 0
    rep = json.loads(out)
    assert rep["ok"] and rep["tool"] == "ribnet" and rep["command"] == "verify"
    assert len(rep["dataset_hash"]) == 64
    for key in ("omega", "net", "cube", "lemmas", "gradient", "linearity", "closed_form"):
        assert rep["results"][key]["ok"], key


def test_verify_by_path(capsys):
    code, out = run(capsys, "verify", str(dataset_path("ds-n3-l2")), "--grid", "-1,1,7")
    assert code == 0
    assert json.loads(out)["results"]["net"]["grid"]["axes"][0][2] == 7


def test_validate_truncated_file(tmp_path, capsys):
    text = dataset_path("ds-n2-l1").read_text()
    bad = tmp_path / "cut.json"
    bad.write_text(text[: len(text) // 2])
    code, _ = run(capsys, "validate", str(bad))
    assert code == 2


def test_validate_structural_violation(tmp_path, capsys):
    obj = json.loads(dataset_path("ds-n2-l1").read_text())
    obj["gamma"] = []
    path = tmp_path / "nogamma.json"
    path.write_text(json.dumps(obj))
    code, out = run(capsys, "validate", str(path))
    assert code == 2
    assert "gamma-degree" in out


def test_transform_bad_alpha(capsys):
    code, _ = run(capsys, "transform", "ds-n2-l1", "--alpha", "3")
    assert code == 2


def test_transform_ok(capsys):
    code, out = run(capsys, "transform", "ds-n3-l2", "--alpha", "2", "--grid", "-1,1,7")
    assert code == 0
    assert json.loads(out)["results"]["alpha"] == 2


def test_missing_file(capsys):
    code, _ = run(capsys, "validate", "/nonexistent/data.json")
    assert code == 3


def test_bad_tolerance_key(capsys):
    code, _ = run(capsys, "synth", "ds-n2-l1", "--tol", "bogus=1")
    assert code == 2


def test_tight_tolerance_fails(capsys):
    code, out = run(capsys, "synth", "ds-n2-l1", "--grid", "-1,1,5", "--tol", "orthogonality=1e-30")
    assert code == 1
    assert not json.loads(out)["ok"]


def test_omega_table(capsys):
    code, out = run(capsys, "omega", "ds-n3-l2")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["residues_r"] == pytest.approx([-0.345, -1.155], abs=1e-12)


def test_cube(capsys):
    code, out = run(capsys, "cube", "ds-n3-l2", "--grid", "-1,1,7")
    assert code == 0
    assert json.loads(out)["results"]["nets"] == 4


def test_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "verify", "ds-n2-N1-l1", "--seed", "7", "--grid", "-1,1,9", "--output", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("fmt", ["csv", "json", "obj"])
def test_synth_and_export(tmp_path, capsys, fmt):
    net_json = tmp_path / "net.json"
    code, _ = run(capsys, "synth", "ds-n2-l1", "--grid", "-1,1,5", "--output", str(net_json))
    assert code == 0
    out = tmp_path / f"net.{fmt}"
    code, _ = run(capsys, "export", str(net_json), "--format", fmt, "--output", str(out))
    assert code == 0
    text = out.read_text()
    if fmt == "csv":
        rows = text.strip().splitlines()
        assert rows[0] == "u1,u2,x1,x2,flagged" and len(rows) == 26
        vals = np.array([r.split(",") for r in rows[1:]], dtype=float)
        assert np.all(np.isfinite(vals))
    elif fmt == "json":
        assert len(json.loads(text)["points"]) == 25
    else:
        lines = text.splitlines()
        assert sum(ln.startswith("v ") for ln in lines) == 25
        assert sum(ln.startswith("l ") for ln in lines) == 10
        assert sum(ln.startswith("f ") for ln in lines) == 16


def test_export_rejects_non_net(capsys):
    code, _ = run(capsys, "export", str(dataset_path("ds-n2-l1")))
    assert code == 2
