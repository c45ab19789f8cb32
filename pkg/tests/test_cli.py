import json
import subprocess
import sys

import pytest

from orbitspace.catalog import random_catalog, save_catalog
from orbitspace.cli import main

CIRCLES = "id,a,ecc,inc_deg,raan_deg,argp_deg\nsat1,1.0,0.0,0,0,0\nsat2,2.0,0.0,0,0,0\nsat3,2.0,0.5,30,40,50\n"


@pytest.fixture
def catalog(tmp_path):
    path = tmp_path / "circles.csv"
    path.write_text(CIRCLES)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dist_concentric(capsys, catalog):
    code, out, _ = run(capsys, "dist", "--a", "sat1", "--b", "sat2", "--metric", "rho", "--p", "2", "--catalog", catalog)
    assert code == 0 and out == "1.0\n"


def test_global_flags_before_command(capsys, catalog):
    code, out, _ = run(capsys, "--catalog", catalog, "--p", "inf", "dist", "--a", "sat2", "--b", "sat1")
    assert code == 0 and out == "1.0\n"


def test_matrix_json_and_csv(capsys, catalog):
    code, out, _ = run(capsys, "matrix", "--catalog", catalog, "--metric", "rho_star")
    payload = json.loads(out)
    assert code == 0 and payload["ids"] == ["sat1", "sat2", "sat3"]
    assert payload["metric"] == "rho_star" and payload["seed"] == 42
    assert payload["matrix"][0][1] == 1.0
    code, out, _ = run(capsys, "matrix", "--catalog", catalog, "--format", "csv")
    assert out.splitlines()[0] == "id,sat1,sat2,sat3"


def test_matrix_matches_dist(capsys, catalog):
    _, out, _ = run(capsys, "matrix", "--catalog", catalog, "--p", "1")
    m = json.loads(out)["matrix"]
    _, d, _ = run(capsys, "dist", "--a", "sat3", "--b", "sat1", "--p", "1", "--catalog", catalog)
    assert float(d) == m[2][0]


def test_nearest(capsys, catalog):
    code, out, _ = run(capsys, "nearest", "--id", "sat1", "-k", "2", "--catalog", catalog)
    body = json.loads(out)
    assert code == 0 and [n["id"] for n in body["neighbors"]] == ["sat2", "sat3"]


def test_output_file(capsys, catalog, tmp_path):
    out_path = tmp_path / "m.json"
    code, out, _ = run(capsys, "matrix", "--catalog", catalog, "--output", str(out_path))
    assert code == 0 and out == "" and json.loads(out_path.read_text())["ids"][0] == "sat1"


def test_convert_round_trip(capsys, catalog, tmp_path):
    code, vectors, _ = run(capsys, "convert", "--to", "vectors", "--input", catalog)
    assert code == 0 and vectors.startswith("id,cx,cy,cz,ex,ey,ez,h,mx,my,mz\n")
    vpath = tmp_path / "v.csv"
    vpath.write_text(vectors)
    code, elements, _ = run(capsys, "convert", "--to", "elements", "--input", str(vpath))
    assert code == 0
    rows = [line.split(",") for line in elements.splitlines()[1:]]
    ref = [line.split(",") for line in CIRCLES.splitlines()[1:]]
    for got, want in zip(rows, ref):
        assert got[0] == want[0]
        assert [float(x) for x in got[1:]] == pytest.approx([float(x) for x in want[1:]], abs=1e-12)


def test_convert_json(capsys, catalog):
    code, out, _ = run(capsys, "convert", "--input", catalog, "--format", "json")
    rows = json.loads(out)
    assert code == 0 and rows[0]["id"] == "sat1" and rows[0]["cz"] == pytest.approx(1.0)


def test_check_roundtrip(capsys):
    code, out, _ = run(capsys, "check", "roundtrip", "--samples", "500", "--seed", "42")
    body = json.loads(out)
    assert code == 0 and body["pass"] and body["max_residual"] <= 1e-10 and body["seed"] == 42


def test_check_axioms(capsys):
    code, out, _ = run(capsys, "check", "axioms", "--samples", "20", "--p", "inf")
    body = json.loads(out)
    assert code == 0 and body["pass"] and body["p"] == "inf"


def test_witness_degree(capsys):
    code, out, _ = run(capsys, "witness", "degree", "--map", "identity", "--depth", "4")
    body = json.loads(out)
    assert code == 0 and body["degree"] == 1 and body["seed"] == 42


@pytest.mark.parametrize(
    "argv",
    [
        ["witness", "obstruction", "--r", "5"],
        ["witness", "cauchy", "--p", "1"],
        ["witness", "unbounded", "--R", "10", "100"],
        ["witness", "completeness", "--space", "H_b", "--b", "2"],
        ["witness", "completeness", "--space", "Estar"],
    ],
)
def test_witness_reports(capsys, argv):
    code, out, _ = run(capsys, *argv)
    body = json.loads(out)
    assert code == 0 and body["pass"] and body["command"].startswith("witness")


def test_verify_conservation(capsys):
    code, out, _ = run(capsys, "verify", "conservation", "--dt", "1e-3", "--steps", "2000")
    body = json.loads(out)
    assert code == 0 and body["steps"] == 2000 and body["pass"]


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "conservation", "--dt", "0.2", "--steps", "100", "--ecc", "0.9")
    assert code == 1 and not json.loads(out)["pass"]


@pytest.mark.parametrize(
    "argv,with_catalog",
    [
        (["bogus"], False),
        (["dist", "--a", "x"], True),
        (["matrix"], False),
        (["matrix", "--catalog", "/nonexistent/file.csv"], False),
        (["dist", "--a", "sat1", "--b", "nope"], True),
        (["matrix", "--p", "0.3"], True),
        (["witness", "degree", "--map", "nosuchmap"], False),
    ],
)
def test_usage_errors(capsys, catalog, argv, with_catalog):
    if with_catalog:
        argv = argv + ["--catalog", catalog]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_bad_catalog_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,a,ecc,inc_deg,raan_deg,argp_deg\nx,1,1.2,0,0,0\n")
    code, _, err = run(capsys, "matrix", "--catalog", str(path))
    assert code == 2 and "line 2" in err
    code, out, _ = run(capsys, "matrix", "--catalog", str(path), "--skip-bad")
    assert code == 0 and json.loads(out)["ids"] == []


def test_env_threads(capsys, tmp_path, monkeypatch):
    path = tmp_path / "c.csv"
    save_catalog(random_catalog(6, seed=1), path)
    _, a, _ = run(capsys, "matrix", "--catalog", str(path), "--threads", "1")
    monkeypatch.setenv("ORBITS_THREADS", "4")
    _, b, _ = run(capsys, "matrix", "--catalog", str(path))
    assert a == b


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "orbitspace.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "witness" in proc.stdout
