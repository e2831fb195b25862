import json
import math
import pathlib

import jsonschema
import numpy as np
import pytest
import referencing

import maxlow

ROOT = pathlib.Path(__file__).resolve().parents[2]
SAMPLE = ROOT / "data" / "meshes" / "sample_unstructured.m2d"


def schema_registry():
    resources = []
    for p in (ROOT / "schemas").glob("*.schema.json"):
        doc = json.loads(p.read_text())
        resources.append((doc["$id"], referencing.Resource.from_contents(doc)))
    return referencing.Registry().with_resources(resources)


def check_schema(doc, name):
    schema = json.loads((ROOT / "schemas" / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=schema_registry()).validate(doc)


def test_mesh_generation_and_refinement():
    m = maxlow.square(2)
    assert (m.num_vertices, m.num_edges, m.num_triangles) == (25, 56, 32)
    assert m.vertices.shape == (25, 2)
    assert m.triangles.shape == (32, 3)
    assert m.h_max == pytest.approx(math.sqrt(2) / 4)
    assert m.validate() == []
    assert m.refine().num_triangles == 128
    le = maxlow.lshape(1, refinement="longest-edge")
    assert le.area == pytest.approx(3.0)


def test_mesh_from_arrays_and_text_round_trip():
    m = maxlow.Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]], dtype=np.int32))
    assert m.num_edges == 3
    again = maxlow.parse_mesh(m.to_string())
    np.testing.assert_array_equal(again.vertices, m.vertices)
    with pytest.raises(ValueError):
        maxlow.parse_mesh("mesh2d v1\n3 0 1\n0 0\n1 0\n0 1\n0 2 1\n")


def test_sample_mesh_reads():
    m = maxlow.read_mesh(str(SAMPLE))
    assert m.num_vertices == 64
    assert m.num_triangles == 102


def test_kappa_and_eigenvalues_square_level1():
    m = maxlow.square(1)
    assert maxlow.kappa(m)["kappa"] == pytest.approx(0.1443376, rel=1e-6)
    ev = maxlow.eigenvalues(m, k=3)
    assert ev[1] == pytest.approx(9.6, rel=1e-8)
    assert np.all(np.diff(ev) >= 0)


def test_constants_and_bounds():
    c = maxlow.constants(maxlow.square(2))
    assert c["C_OL"] == 13
    assert c["C_QT"] == pytest.approx(2 / 3)
    rows = maxlow.bounds("square", 1, 2, k=2, c1div=9.7290, constants_source="envelope")
    assert [r["level"] for r in rows] == [1, 2]
    assert rows[0]["m_hat"] == pytest.approx(9.1034, rel=1e-2)
    for r in rows:
        assert r["ok"]
        assert all(lb <= ref for lb, ref in zip(r["lower_bound"], [math.pi**2, 2 * math.pi**2]))
        assert r["lower_bound"][0] == pytest.approx(maxlow.lower_bound(r["lambda"][0], r["m_hat"]))
    with pytest.raises(ValueError):
        maxlow.bounds(k=0)


def test_validate_properties():
    props = maxlow.validate(maxlow.square(1), samples=20)
    assert props and all(p["pass"] for p in props)


def test_cli_json_matches_schemas():
    code, out, err = maxlow.cli(["bounds", "--levels", "1", "-k", "2", "--format", "json"])
    assert code == 0, err
    check_schema(json.loads(out), "bounds")
    code, out, _ = maxlow.cli(["constants", "--levels", "2", "--format", "json"])
    assert code == 0
    check_schema(json.loads(out), "constants")
    code, out, _ = maxlow.cli(["evp", "--mesh", str(SAMPLE), "-k", "2", "--format", "json"])
    assert code == 0
    check_schema(json.loads(out), "bounds")
    code, out, _ = maxlow.cli(["validate", "--levels", "1", "--samples", "20", "--format", "json"])
    assert code == 0
    check_schema(json.loads(out), "validate")


def test_cli_exit_codes():
    assert maxlow.cli(["bounds", "-k", "0"])[0] == 2
    assert maxlow.cli(["kappa", "--mesh", "/nonexistent.m2d"])[0] == 2
    assert maxlow.cli(["validate", "--levels", "1", "--samples", "5", "--inject-fault", "curl-sign"])[0] == 1
