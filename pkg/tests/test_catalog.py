import json
import math

import numpy as np
import pytest

from orbitspace import core
from orbitspace.catalog import (
    CatalogError,
    CatalogRecord,
    RunConfig,
    distance_matrix,
    dump_catalog,
    load_catalog,
    matrix_to_csv,
    matrix_to_json,
    nearest,
    pair_distance,
    parse_catalog,
    random_catalog,
    resolve_threads,
    save_catalog,
)

HEADER = "id,a,ecc,inc_deg,raan_deg,argp_deg\n"


def circles(radii, ids=None):
    ids = ids or [f"r{r:g}" for r in radii]
    return [CatalogRecord(i, core.KeplerElements(r, 0.0, 0.0)) for i, r in zip(ids, radii)]


def test_parse_rows():
    recs, problems = parse_catalog(HEADER + "sat1,1.0,0.0,0,0,0\nsat2,2.0,0.5,0,0,0\n")
    assert problems == []
    o1, o2 = recs[0].orbit, recs[1].orbit
    assert np.allclose(o1.c, [0, 0, 1]) and o1.emag == 0
    assert np.allclose(o2.c, [0, 0, math.sqrt(1.5)]) and o2.emag == 0.5


def test_angles_in_degrees():
    recs, _ = parse_catalog(HEADER + "x,1,0.1,90,180,45\n")
    el = recs[0].elements
    assert (el.inc, el.raan, el.argp) == pytest.approx((math.pi / 2, math.pi, math.pi / 4))


def test_bad_rows_line_numbers():
    text = HEADER + "ok,1,0,0,0,0\nbad,1,1.2,0,0,0\nneg,-1,0,0,0,0\nnan,x,0,0,0,0\nok,2,0,0,0,0\n"
    with pytest.raises(CatalogError) as info:
        parse_catalog(text)
    lines = [ln for ln, _ in info.value.problems]
    assert lines == [3, 4, 5, 6]
    assert "duplicate" in info.value.problems[-1][1]
    recs, problems = parse_catalog(text, skip_bad=True)
    assert [r.id for r in recs] == ["ok"] and len(problems) == 4


def test_missing_columns():
    with pytest.raises(CatalogError, match="missing columns"):
        parse_catalog("id,a,ecc\nx,1,0\n")


def test_json_catalog():
    data = {"kappa2": 2.0, "records": [{"id": "a", "a": 1, "ecc": 0, "inc_deg": 0, "raan_deg": 0, "argp_deg": 0}]}
    recs, _ = parse_catalog(json.dumps(data), "json")
    assert recs[0].kappa2 == 2.0
    with pytest.raises(CatalogError):
        parse_catalog("[{\"id\": 1}]", "json")
    with pytest.raises(CatalogError):
        parse_catalog("{not json", "json")


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_save_load_identity(tmp_path, suffix):
    recs = random_catalog(25, seed=3)
    path = tmp_path / f"cat{suffix}"
    save_catalog(recs, path)
    back = load_catalog(path)
    assert [r.id for r in back] == [r.id for r in recs]
    for a, b in zip(recs, back):
        for name in ("a", "ecc", "inc", "raan", "argp"):
            assert getattr(b.elements, name) == pytest.approx(getattr(a.elements, name), rel=1e-14, abs=1e-14)
    # a second round is exact
    save_catalog(back, tmp_path / f"again{suffix}")
    assert (tmp_path / f"again{suffix}").read_text() == path.read_text()


def test_matrix_examples():
    m = distance_matrix(circles([1, 2]))
    assert m[0, 1] == pytest.approx(1.0, abs=1e-12) and m[1, 0] == m[0, 1]
    assert np.array_equal(distance_matrix(circles([1])), np.zeros((1, 1)))


@pytest.mark.parametrize("metric,p", [("rho", 2), ("rho_star", "inf"), ("rho", 1)])
def test_matrix_matches_pair_distance(metric, p):
    recs = random_catalog(8, seed=1)
    config = RunConfig(metric=metric, p=p, threads=3)
    m = distance_matrix(recs, config)
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == 0)
    for i in range(len(recs)):
        for j in range(len(recs)):
            assert pair_distance(recs, recs[i].id, recs[j].id, config) == m[i, j]


def test_matrix_thread_independent():
    recs = random_catalog(12, seed=2)
    a = distance_matrix(recs, RunConfig(threads=1))
    b = distance_matrix(recs, RunConfig(threads=5))
    assert np.array_equal(a, b)


def test_nearest_examples():
    recs = circles([1, 1.1, 3], ids=["one", "onetenth", "three"])
    assert nearest(recs, "one", 1)[0][0] == "onetenth"
    ranked = nearest(recs, "one", 2)
    assert [r for r, _ in ranked] == ["onetenth", "three"]
    assert ranked[1][1] == pytest.approx(2.0, abs=1e-12)


def test_nearest_tie_break():
    # radii 1 and 3 are both at distance 1 from radius 2
    recs = circles([2, 3, 1], ids=["q", "b", "a"])
    assert [r for r, _ in nearest(recs, "q", 2)] == ["a", "b"]


def test_nearest_errors():
    recs = circles([1, 2])
    with pytest.raises(KeyError):
        nearest(recs, "zzz", 1)
    with pytest.raises(ValueError):
        nearest(recs, "r1", 2)


def test_nearest_matches_matrix():
    recs = random_catalog(10, seed=4)
    m = distance_matrix(recs)
    for rid, value in nearest(recs, recs[3].id, 9):
        j = [r.id for r in recs].index(rid)
        assert value == m[3, j]


def test_emitters():
    ids = ["a", "b"]
    m = np.array([[0.0, 1.0 / 3.0], [1.0 / 3.0, 0.0]])
    payload = json.loads(matrix_to_json(ids, m, RunConfig(p="inf")))
    assert payload["p"] == "inf" and payload["ids"] == ids
    assert payload["matrix"][0][1] == 0.333333333333
    assert matrix_to_csv(ids, m).splitlines()[1] == "a,0,0.333333333333"


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("ORBITS_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    assert resolve_threads("auto") >= 1
    with pytest.raises(ValueError):
        resolve_threads(0)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(metric="euclid")
    with pytest.raises(ValueError):
        RunConfig(p=0.5)
    assert RunConfig(p="inf").p_label == "inf"


def test_dump_catalog_header():
    assert dump_catalog(circles([1])).startswith(HEADER)
