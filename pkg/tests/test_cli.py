import json

import numpy as np
import pytest

from bzwave.cli import SNAPSHOT_COLUMNS, main, order_table, read_snapshot
from bzwave.errors import ScenarioError
from bzwave.scenarios import SHIPPED, load_scenario, parse_scenario

SMALL = {
    "name": "tiny",
    "alpha": {"alpha1": {"family": "gaussian", "amp": 0.02, "width": 50.0}, "cosmological": True,
              "K2": 40.0},
    "initial": {"epsilon": 0.001, "lambda_tilde0": {"family": "gaussian", "amp": 1.0},
                "phi0": {"family": "gaussian", "amp": 1.0, "center": 0.5}},
    "evolution": {"x_min": -12.0, "x_max": 12.0, "n": 241, "t_end": 2.0, "output_stride": 4},
    "diagnostics": {"velocities": [0.0, 0.3], "orientation": "timelike"},
}


def write(tmp_path, doc, name="sc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenarios_load(name):
    sc = load_scenario(name)
    assert sc.name == name
    assert len(sc.config_hash) == 64


def test_schema_errors():
    with pytest.raises(ScenarioError):
        parse_scenario(dict(SMALL, extra_key=1))
    for mutate in (
        lambda d: d["initial"].__setitem__("epsilon", -1.0),
        lambda d: d["initial"].__setitem__("lambda0", 0.0),
        lambda d: d["evolution"].__setitem__("n", 240),
        lambda d: d["evolution"].pop("t_end"),
        lambda d: d["initial"].__setitem__("phi0", {"family": "nope"}),
        lambda d: d["diagnostics"].__setitem__("velocities", [1.5]),
    ):
        doc = json.loads(json.dumps(SMALL))
        mutate(doc)
        with pytest.raises(ScenarioError):
            parse_scenario(doc)


def test_validate_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["validate", "smalldata_gaussian", "--out", out]) == 0
    assert "PASS" in (tmp_path / "out" / "smalldata_gaussian" / "validation.txt").read_text()
    big = json.loads(json.dumps(SMALL))
    big["name"] = "big"
    big["small_data"] = True
    big["initial"]["epsilon"] = 10.0
    assert main(["validate", write(tmp_path, big), "--strict", "--out", out]) == 0
    assert "WARNING" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad), "--out", out]) == 2
    assert main(["validate", str(tmp_path / "missing.json"), "--out", out]) == 2
    failing = json.loads(json.dumps(SMALL))
    failing.update(name="failing", small_data=True)
    failing["alpha"]["alpha0_tilde"] = {"family": "bump", "amp": 1.0, "radius": 2.0}
    assert main(["validate", write(tmp_path, failing), "--out", out]) == 1


def test_simulate_minkowski_zero_diagnostics(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "minkowski", "--out", str(out), "--no-figures"]) == 0
    run = out / "minkowski"
    data = np.genfromtxt(run / "diagnostics.csv", delimiter=",", names=True)
    for col in ("E", "E_hat", "I", "windowed_field", "energy_k0", "energy_k1", "flux", "cont_linf"):
        vals = data[col][np.isfinite(data[col])]
        assert np.all(vals == 0), col
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["exit_code"] == 0 and len(manifest["config_hash"]) == 64
    assert "wall_time_s" in manifest


def test_simulate_deterministic_and_snapshots(tmp_path):
    path = write(tmp_path, dict(SMALL, outputs={"snapshot_every": 2}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", path, "--out", str(a)]) == 0
    assert main(["simulate", path, "--out", str(b), "--no-figures"]) == 0
    files = sorted(p.relative_to(a / "tiny") for p in (a / "tiny").rglob("*.csv"))
    assert len(files) > 3
    for f in files:
        assert (a / "tiny" / f).read_bytes() == (b / "tiny" / f).read_bytes()
    assert (a / "tiny" / "diagnostics.png").exists()
    snap = sorted((a / "tiny" / "snapshots").glob("*.csv"))[-1]
    assert snap.read_text().startswith("# t=")
    meta, cols = read_snapshot(snap)
    assert meta["n"] == 241 and meta["dx"] == pytest.approx(0.1)
    assert list(cols) == list(SNAPSHOT_COLUMNS)
    assert np.all(np.isfinite(cols["v"]))


def test_simulate_guard_trip_exit_3(tmp_path):
    doc = json.loads(json.dumps(SMALL))
    doc.update(name="large")
    doc["initial"]["epsilon"] = 10.0
    doc["initial"]["lambda_tilde1"] = {"family": "gaussian", "amp": -1.0}
    out = tmp_path / "out"
    assert main(["simulate", write(tmp_path, doc), "--out", str(out), "--no-figures"]) == 3
    manifest = json.loads((out / "large" / "manifest.json").read_text())
    assert manifest["exit_code"] == 3 and "LambdaDegenerate" in json.dumps(manifest)


def test_exact_tabulation(tmp_path):
    out = tmp_path / "out"
    assert main(["exact", "kasner_soliton", "--out", str(out), "--t", "0.5"]) == 0
    run = out / "kasner_soliton"
    data = np.genfromtxt(run / "exact.csv", delimiter=",", names=True)
    for col in ("x", "Lambda", "phi", "alpha", "g11", "g12", "g22", "e_hat", "p_hat"):
        assert col in data.dtype.names
    assert np.allclose(data["g11"] * data["g22"] - data["g12"] ** 2, data["alpha"] ** 2, rtol=1e-12)
    assert (run / "exact.png").exists()
    assert main(["exact", write(tmp_path, SMALL), "--out", str(out)]) == 2


def test_convergence_minkowski_exact(tmp_path):
    out = tmp_path / "out"
    assert main(["convergence", "minkowski", "--out", str(out), "--levels", "101", "201", "401",
                 "--no-figures"]) == 0
    rows = (out / "minkowski" / "orders.csv").read_text().splitlines()[1:]
    assert rows and all(",exact" in r for r in rows)


def test_order_table_statuses():
    dxs = [0.4, 0.2, 0.1]
    row = order_table(dxs, [1.0, 0.25, 0.0625], [0, 0, 0], 1.8)
    assert row["status"] == "PASS" and row["orders"] == pytest.approx([2.0, 2.0])
    assert order_table(dxs, [1.0, 0.5, 0.25], [0, 0, 0], 1.8)["status"] == "FAIL"
    assert order_table(dxs, [1e-16, 1e-16, 1e-16], [1e-14] * 3, 1.8)["status"] == "exact"
    row = order_table(dxs, [1.0, 0.25, 1e-16], [1e-14] * 3, 1.8)
    assert row["orders"][1] == "round-off" and row["status"] == "PASS"


def test_decay_study_small(tmp_path):
    out = tmp_path / "out"
    code = main(["decay-study", write(tmp_path, SMALL), "--out", str(out), "--no-figures",
                 "--velocities", "0", "0.3"])
    run = out / "tiny"
    summary = json.loads((run / "decay_summary.json").read_text())
    assert set(summary["velocities"]) == {"0", "0.3"}
    assert (run / "decay_v0.csv").exists() and (run / "decay_v0.3.csv").exists()
    assert code in (0, 1)


def test_parallel_jobs_match_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    names = ["minkowski", "kasner_background", "er_bessel"]
    assert main(["exact", *names, "--out", str(a), "--jobs", "3", "--no-figures"]) == 0
    assert main(["exact", *names, "--out", str(b), "--no-figures"]) == 0
    for n in names:
        assert (a / n / "exact.csv").read_bytes() == (b / n / "exact.csv").read_bytes()
