import json
import subprocess
import sys

from lattice_orbits.cli import SCHEMA, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA
    assert (code == 0) == ("error" not in doc)
    return code, doc


def test_cf_expand_golden(capsys):
    code, doc = run_json(capsys, "cf", "expand", "--surd", "sqrt5:-1:2", "--n", "10")
    assert code == 0 and doc["result"]["digits"] == [1] * 10
    assert doc["config"]["n"] == 10 and "precision" in doc["config"]


def test_cf_expand_rational_terminates(capsys):
    _, doc = run_json(capsys, "cf", "expand", "--rational", "1/3", "--n", "5")
    assert doc["result"]["digits"] == [3] and doc["result"]["terminated"]


def test_cf_cylinder(capsys):
    _, doc = run_json(capsys, "cf", "cylinder", "--index", "1,2")
    assert (doc["result"]["left"], doc["result"]["right"]) == ("2/3", "3/4")


def test_error_object_and_exit_code(capsys):
    code, doc = run_json(capsys, "cf", "expand", "--rational", "5/2")
    assert code != 0 and doc["error"]["type"] == "ValueError"
    code, doc = run_json(capsys, "orbit", "chain", "--lattice", "nonsense:1")
    assert code != 0


def test_orbit_chain_and_precompact(capsys):
    _, doc = run_json(capsys, "orbit", "chain", "--lattice", "reconstruct:phi,phi,+1", "--depth", "5")
    pts = doc["result"]["points"]
    assert len(pts) == 6 and [p["eps"] for p in pts] == [1, -1, 1, -1, 1, -1]
    _, doc = run_json(capsys, "orbit", "precompact", "--lattice", "reconstruct:sqrt2m1,sqrt2m1,+1",
                      "--depth", "100")
    assert doc["result"]["verdict"].startswith("precompact certified")
    assert doc["result"]["max_digit_x"] == 2


def test_orbit_scan_csv_has_header_rows(capsys):
    code, out = run(capsys, "--format", "csv", "orbit", "scan", "--alpha", "surd:phi",
                    "--t", "0:2:0.01")
    lines = out.splitlines()
    assert code == 0
    assert json.loads(lines[0][2:]) == {"schema": SCHEMA}
    assert "config" in json.loads(lines[1][2:])
    result = json.loads(lines[2][2:])["result"]
    assert set(result["inf_squared"]) == {"value", "error_bound"}
    assert lines[3] == "t,lambda1,i,j" and len(lines) > 200


def test_norm_critical_and_di(capsys):
    _, doc = run_json(capsys, "norm", "critical", "--kind", "euclidean")
    r = doc["result"]["r_hat"]
    assert abs(float(r["value"]) - 1.07457) < 1e-4 and float(r["error_bound"]) <= 1e-4
    _, doc = run_json(capsys, "norm", "critical", "--kind", "sup")
    assert abs(float(doc["result"]["r_hat"]["value"]) - 1.0) < 1e-6
    _, doc = run_json(capsys, "norm", "di", "--alpha", "rational:2/5", "--kind", "sup")
    assert doc["result"]["verdict"] == "improvable"


def test_norm_conjugate(capsys):
    _, doc = run_json(capsys, "norm", "conjugate", "--kind", "hexagon",
                      "--target", "reconstruct:phi,phi,+1")
    res = doc["result"]
    assert float(res["locus_point_distance_to_target"]["value"]) < 1e-12
    assert res["target_precompact"]["verdict"].startswith("precompact certified")


def test_construct_synthesize_then_verify(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    code, _ = run(capsys, "--output", str(plan), "construct", "synthesize", "--target", "phi,phi",
                  "--L", "2", "--K", "6")
    assert code == 0
    doc = json.loads(plan.read_text())
    assert doc["result"]["positions"] == [2, 16, 54, 128, 250, 432]
    _, doc = run_json(capsys, "construct", "verify", "--plan", str(plan), "--checkpoints", "6")
    dists = [float(c["distance"]) for c in doc["result"]["checkpoints"]]
    assert dists[0] > dists[1] > dists[2] and dists[-1] < 1e-2


def test_dim_commands(capsys):
    _, doc = run_json(capsys, "dim", "bound", "--L", "10", "--M", "1", "--positions", "cubic",
                      "--mmax", "200")
    assert abs(float(doc["result"]["asymptotic_bound"]["value"]) - 0.736966) < 1e-6
    _, doc = run_json(capsys, "dim", "audit", "--L", "3", "--mmax", "5")
    assert doc["result"]["certified"]
    assert all(lv["passed"] for lv in doc["result"]["levels"])


def test_precision_flag_and_env(capsys, monkeypatch):
    _, doc = run_json(capsys, "--precision", "128", "cf", "cylinder", "--index", "2")
    assert doc["config"]["precision"] == 128
    monkeypatch.setenv("LATTICE_ORBITS_PRECISION", "96")
    _, doc = run_json(capsys, "cf", "cylinder", "--index", "2")
    assert doc["config"]["precision"] == 96
    _, doc = run_json(capsys, "--precision", "300", "cf", "cylinder", "--index", "2")
    assert doc["config"]["precision"] == 300


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "lattice_orbits", "cf", "convergents", "--digits",
                          "1,2,2"], capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["result"]["convergents"] == ["1/1", "2/3", "5/7"]
