import json
import math

import pytest

from entcurv.cli import main
from entcurv.model_zoo import curie_weiss


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_curvature_on_hypercube(capsys, tmp_path):
    code, _, err = run(capsys, "curvature", "--model", "hypercube:4", "--out", str(tmp_path / "r.json"))
    assert code == 0
    data = json.loads((tmp_path / "r.json").read_text())
    assert len(data["vertices"]) == 16
    assert data["summary"]["inf_r"] == pytest.approx(-2 * math.log(3 / 4), abs=1e-10)
    assert "inf r" in err


def test_curvature_csv(capsys):
    code, out, _ = run(capsys, "curvature", "--model", "cycle:5", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 6


def test_complete_graph_file(capsys, tmp_path):
    labels = [str(i) for i in range(5)]
    edges = [[a, b] for i, a in enumerate(labels) for b in labels[i + 1:]]
    path = tmp_path / "k5.json"
    path.write_text(json.dumps({"vertices": labels, "edges": edges, "name": "K5"}))
    code, _, err = run(capsys, "curvature", "--graph", str(path))
    assert code == 0 and "r = +inf (complete graph)" in err


def test_verify_displacement_is_deterministic(capsys):
    argv = ("verify", "displacement", "--model", "hypercube:3", "--cost", "t2", "--samples", "5", "--seed", "7")
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0 and out1 == out2
    data = json.loads(out1)
    assert data["holds"] is True and data["seed"] == 7


def test_verify_on_petersen_uses_negative_kappa(capsys):
    code, out, _ = run(capsys, "verify", "displacement", "--model", "petersen", "--samples", "3")
    assert code == 0 and json.loads(out)["holds"]


def test_verify_violation_exits_one(capsys):
    code, out, _ = run(capsys, "verify", "displacement", "--model", "hypercube:3", "--kappa", "10",
                       "--samples", "3")
    assert code == 1 and json.loads(out)["holds"] is False


@pytest.mark.parametrize("argv", [
    ("verify", "transport", "--model", "hypercube:3", "--samples", "5"),
    ("verify", "mlsi", "--model", "hypercube:3", "--samples", "5"),
    ("verify", "bonnet-myers", "--model", "hypercube:3"),
    ("verify", "tensorization", "--model", "path:3", "--with", "cycle:4"),
])
def test_other_checks(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and json.loads(out)["holds"]


def test_bridge_and_w1(capsys):
    code, out, _ = run(capsys, "bridge", "--model", "hypercube:2", "--from", "00", "--to", "11", "--t", "0.5")
    data = json.loads(out)
    assert code == 0 and data["mass"] == pytest.approx(1.0)
    assert data["measure"] == pytest.approx({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25})
    code, out, _ = run(capsys, "w1", "--model", "hypercube:3", "--from", "000", "--to", "111")
    assert code == 0 and json.loads(out)["w1"] == 3


def test_ising(capsys, tmp_path):
    spec = tmp_path / "ising.json"
    spec.write_text(json.dumps({"W": curie_weiss(10).tolist(), "beta": 0.04}))
    code, out, _ = run(capsys, "ising", "--spec", str(spec), "--beta-sweep", "0:0.1:0.005")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "beta,rho_tilde" and len(rows) == 22
    assert float(rows[1].split(",")[1]) == pytest.approx(1.0)
    code, out, _ = run(capsys, "ising", "--spec", str(spec))
    assert code == 0 and json.loads(out)["rho_tilde"] > 0


def test_lattice(capsys, tmp_path):
    pot = tmp_path / "v.json"
    pot.write_text(json.dumps({"quadratic": [[0.0, 0.0], [0.0, 0.0]]}))
    code, out, _ = run(capsys, "lattice", "--model", "lattice-box:5,5", "--potential", str(pot), "--vertex", "2,2")
    data = json.loads(out)
    assert code == 0 and data["vertices"][0]["vertex"] == "2,2"


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--model", "windmill:4,2", "--samples", "3")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 7
    code, out, _ = run(capsys, "compare", "--model", "windmill:4,2", "--samples", "3", "--format", "csv")
    assert out.splitlines()[0] == "vertex,K,r,rtilde2,lly_min,gamma2_min"


def test_model_info(capsys):
    code, out, _ = run(capsys, "model-info", "--model", "hypercube:3")
    data = json.loads(out)
    assert code == 0 and data["vertices"] == 8 and data["diameter"] == 3
    assert data["lambda2"] == pytest.approx(2.0)
    assert "cheeger" in data


@pytest.mark.parametrize("argv", [
    (),
    ("nosuch",),
    ("curvature",),
    ("curvature", "--model", "hypercube:3", "--graph", "x.json"),
    ("curvature", "--model", "nosuch:3"),
    ("curvature", "--graph", "/nonexistent/file.json"),
    ("bridge", "--model", "hypercube:2", "--from", "00", "--to", "11", "--t", "2"),
    ("w1", "--model", "hypercube:2"),
    ("verify", "tensorization", "--model", "path:3"),
    ("ising",),
    ("verify", "displacement", "--model", "hypercube:3", "--t-grid", "0.5,1.5"),
])
def test_usage_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_output_has_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "curvature", "--model", "hypercube:3")
    data = json.loads(out)
    assert out == json.dumps(data, sort_keys=True, indent=2) + "\n"
    assert data["summary"]["inf_rbar"] == float(f"{-4 * math.log(2 / 3):.12g}")
