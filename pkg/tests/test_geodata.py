"""GeoJSON bundle round-trips, georeferencing, and parse diagnostics."""

import json
import warnings

import pytest

from odnplan import (
    AffineTransform,
    ControlPoint,
    ControlPointCountWarning,
    DanglingReferenceError,
    DegenerateControlPointsError,
    GeometryTypeMismatchError,
    REQUIRED_LAYERS,
    SchemaError,
    TooFewPointsError,
    apply_affine,
    assemble_plan,
    attach_budget,
    emit_plan,
    fit_affine,
    geodesic_length_km,
    load_plan,
    plan_from_trees,
    preset,
    read_control_points,
    save_bundle,
    validate_plan,
)

from conftest import FIXTURES


def cp(sx, sy, tx, ty):
    return ControlPoint(source=(sx, sy), target=(tx, ty))


def test_fit_affine_recovers_translation():
    pts = [cp(0, 0, 10, 20), cp(1, 0, 11, 20), cp(0, 1, 10, 21), cp(1, 1, 11, 21)]
    tf, rms = fit_affine(pts)
    assert abs(tf.a - 1) < 1e-9 and abs(tf.b) < 1e-9
    assert abs(tf.tx - 10) < 1e-9 and abs(tf.ty - 20) < 1e-9
    assert rms < 1e-9
    assert apply_affine(tf, [(2.0, 3.0)])[0] == pytest.approx((12.0, 23.0))


def test_fit_affine_three_points_is_exact():
    pts = [cp(0, 0, 5, 5), cp(2, 0, 9, 6), cp(0, 3, 4, 11)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tf, rms = fit_affine(pts)
    assert rms == 0.0
    assert any(issubclass(w.category, ControlPointCountWarning) for w in caught)
    for p in pts:
        assert tf.apply(p.source) == pytest.approx(p.target, abs=1e-9)


def test_fit_affine_four_points_silent():
    pts = [cp(0, 0, 0, 0), cp(1, 0, 2, 0), cp(0, 1, 0, 2), cp(1, 1, 2, 2)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit_affine(pts)
    assert caught == []


def test_fit_affine_degenerate():
    with pytest.raises(DegenerateControlPointsError):
        fit_affine([cp(0, 0, 0, 0), cp(1, 1, 2, 2), cp(2, 2, 4, 4)])
    with pytest.raises(DegenerateControlPointsError):
        fit_affine([cp(0, 0, 0, 0), cp(1, 1, 2, 2)])


def test_affine_determinant_guard():
    with pytest.raises(ValueError):
        AffineTransform(a=1.0, b=2.0, c=2.0, d=4.0, tx=0.0, ty=0.0)


def test_read_control_points_csv(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("sx,sy,tx,ty\n0,0,10,10\n1,0,11,10\n")
    got = read_control_points(p)
    assert got == [cp(0.0, 0.0, 10.0, 10.0), cp(1.0, 0.0, 11.0, 10.0)]
    bare = tmp_path / "bare.csv"
    bare.write_text("0,0,10,10\n1,0,11,10\n")
    assert read_control_points(bare) == got


def test_read_control_points_json(tmp_path):
    p = tmp_path / "pts.json"
    p.write_text(json.dumps([{"source": [0, 0], "target": [1, 1]}]))
    assert read_control_points(p) == [cp(0.0, 0.0, 1.0, 1.0)]


def test_read_control_points_bad_row(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("0,0,1,1\nx,y,z,w\n")
    with pytest.raises(ValueError, match="row 2"):
        read_control_points(p)


def test_geodesic_length():
    one_degree = geodesic_length_km([(0.0, 0.0), (1.0, 0.0)])
    assert one_degree == pytest.approx(111.195, abs=0.01)
    with pytest.raises(TooFewPointsError):
        geodesic_length_km([(0.0, 0.0)])


def test_assemble_fills_required_layers():
    plan = assemble_plan({})
    assert set(plan.layers) == set(REQUIRED_LAYERS)
    assert plan.trees == ()


def test_canonical_order_and_rounding(small_tree):
    plan = plan_from_trees([small_tree])
    layers = emit_plan(plan)
    shuffled = {k: json.loads(json.dumps(v)) for k, v in layers.items()}
    shuffled["equipment"]["features"].reverse()
    # jitter below the canonical precision
    feat = shuffled["equipment"]["features"][0]
    feat["geometry"]["coordinates"][0] += 4e-9
    again = assemble_plan(shuffled, plan.metadata)
    assert emit_plan(again) == layers


def test_roundtrip_preserves_unknown_layers():
    plan = load_plan(FIXTURES / "unknown_layer")
    assert "landmarks" in plan.layers
    assert plan.metadata.author == "survey team"
    emitted = emit_plan(plan)
    assert emitted["landmarks"] == plan.layers["landmarks"]
    again = assemble_plan(emitted, plan.metadata)
    assert again == plan


def test_fixture_plan_graph():
    plan = load_plan(FIXTURES / "unknown_layer")
    assert validate_plan(plan) == []
    assert len(plan.trees) == 1
    tree = plan.trees[0]
    assert tree.root_port == "co/1/4"
    assert sorted(o.id for o in tree.onts()) == ["ont-a", "ont-b"]
    assert tree.physical_reach_limit_km == 20


def test_save_and_load_bundle(tmp_path, villas_plan):
    manifest_path = save_bundle(villas_plan, tmp_path / "out")
    manifest = json.loads(manifest_path.read_text())
    assert set(manifest["layers"]) >= set(REQUIRED_LAYERS)
    again = load_plan(manifest_path.parent)
    assert again == villas_plan


def test_load_directory_without_manifest(tmp_path, villas_plan):
    manifest_path = save_bundle(villas_plan, tmp_path / "out")
    manifest_path.unlink()
    again = load_plan(manifest_path.parent)
    assert emit_plan(again) == emit_plan(villas_plan)


def test_dangling_reference_fixture():
    with pytest.raises(DanglingReferenceError) as err:
        load_plan(FIXTURES / "bad_dangling")
    assert "ghost" in str(err.value)


def test_geometry_mismatch_fixture():
    with pytest.raises(GeometryTypeMismatchError):
        load_plan(FIXTURES / "bad_geometry")


def test_schema_error_fixture():
    with pytest.raises(SchemaError):
        load_plan(FIXTURES / "bad_schema")


def test_duplicate_ids_rejected():
    node = {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [0.0, 0.0]},
        "properties": {"odn": {"id": "co", "kind": "central_office_olt"}},
    }
    layer = {"type": "FeatureCollection", "features": [node, json.loads(json.dumps(node))]}
    with pytest.raises(SchemaError, match="duplicate"):
        assemble_plan({"equipment": layer})


def test_two_roots_two_trees():
    def olt(oid, x):
        return {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [x, 0.0]},
            "properties": {"odn": {"id": oid, "kind": "central_office_olt", "root_port": f"{oid}/1/1"}},
        }

    def ont(oid, x):
        return {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [x, 0.0]},
            "properties": {"odn": {"id": oid, "kind": "ont"}},
        }

    def drop(did, a, b, ax, bx):
        return {
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[ax, 0.0], [bx, 0.0]]},
            "properties": {"odn": {"id": did, "from": a, "to": b, "fiber_count": 2, "length_km": 0.2}},
        }

    layers = {
        "equipment": {
            "type": "FeatureCollection",
            "features": [olt("co-1", 0.0), olt("co-2", 1.0), ont("o1", 0.01), ont("o2", 1.01)],
        },
        "drop_cables": {
            "type": "FeatureCollection",
            "features": [drop("d1", "co-1", "o1", 0.0, 0.01), drop("d2", "co-2", "o2", 1.0, 1.01)],
        },
    }
    plan = assemble_plan(layers)
    assert sorted(t.root_port for t in plan.trees) == ["co-1/1/1", "co-2/1/1"]
    assert validate_plan(plan) == []


def test_attach_budget_annotates_onts(villas_plan):
    plan = attach_budget(villas_plan, preset("theoretical"))
    feats = plan.layer("equipment")["features"]
    budgets = [
        f["properties"]["odn"]["budget"]
        for f in feats
        if f["properties"]["odn"].get("kind") == "ont"
    ]
    assert len(budgets) == 32
    assert all(b["classification"] == "in_service" for b in budgets)
    assert all(abs(b["total_db"] - 21.3825) < 1e-9 for b in budgets)
    # source plan untouched
    src = villas_plan.layer("equipment")["features"]
    assert all("budget" not in f["properties"]["odn"] for f in src)


def test_validate_plan_flags_isolated_ont(villas_plan):
    layers = emit_plan(villas_plan)
    layers = json.loads(json.dumps(layers))
    layers["equipment"]["features"].append(
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [5.0, 5.0]},
            "properties": {"odn": {"id": "stray", "kind": "ont"}},
        }
    )
    plan = assemble_plan(layers, villas_plan.metadata)
    codes = [v.code for v in validate_plan(plan)]
    assert "DisconnectedOnt" in codes
