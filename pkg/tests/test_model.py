"""Core model: nodes, segments, trees, path extraction, topology rules."""

from decimal import Decimal

import pytest

from odnplan import (
    DisconnectedOntError,
    FiberSegment,
    NodeKind,
    OdnNode,
    PonTree,
    SegmentRole,
    SplitterSpec,
    UnknownOntError,
    haversine_km,
    path_to_ont,
    to_decimal,
    total_split,
    validate_topology,
)


def codes(violations):
    return sorted(v.code for v in violations)


def test_to_decimal_exact_float_repr():
    assert to_decimal(0.1) == Decimal("0.1")
    assert to_decimal(1.95) == Decimal("1.95")
    assert to_decimal(3) == Decimal(3)
    assert to_decimal(Decimal("2.5")) is not None
    assert str(to_decimal(0.35)) == "0.35"


def test_node_position_range_checked():
    with pytest.raises(ValueError):
        OdnNode(id="x", kind=NodeKind.ONT, position=(200.0, 0.0))
    with pytest.raises(ValueError):
        OdnNode(id="x", kind=NodeKind.ONT, position=(0.0, 95.0))


def test_effective_length_prefers_explicit_over_geometry():
    seg = FiberSegment(
        id="s", from_node="a", to_node="b", role=SegmentRole.FEEDER,
        fiber_count=2, length_km=1.5, geometry=((0.0, 0.0), (0.0, 1.0)),
    )
    assert seg.effective_length_km == Decimal("1.5")


def test_effective_length_from_geometry_geodesic():
    seg = FiberSegment(
        id="s", from_node="a", to_node="b", role=SegmentRole.FEEDER,
        fiber_count=2, geometry=((0.0, 0.0), (0.0, 1.0)),
    )
    got = seg.effective_length_km
    assert got is not None
    assert abs(float(got) - haversine_km((0.0, 0.0), (0.0, 1.0))) < 1e-9


def test_effective_length_missing_is_none():
    seg = FiberSegment(id="s", from_node="a", to_node="b", role=SegmentRole.DROP, fiber_count=2)
    assert seg.effective_length_km is None


def test_path_to_ont_aggregates(small_tree):
    path = path_to_ont(small_tree, "ont-a")
    assert [s.id for s in path.segments] == ["f1", "d1"]
    assert path.length_km == Decimal("1.25")
    assert path.connector_count == 2
    assert path.splice_count == 1
    assert path.splitter_ratios == (2,)
    assert path.total_split == 2
    assert total_split(small_tree, "ont-b") == 2


def test_path_to_ont_unknown_and_disconnected(small_tree):
    with pytest.raises(UnknownOntError):
        path_to_ont(small_tree, "nope")
    # hub is not an ONT
    with pytest.raises(UnknownOntError):
        path_to_ont(small_tree, "hub")
    orphan = PonTree(
        root_port="co/1/1",
        nodes=small_tree.nodes + (OdnNode(id="ont-c", kind=NodeKind.ONT, position=(10.02, 50.0)),),
        segments=small_tree.segments,
        splitters=small_tree.splitters,
    )
    with pytest.raises(DisconnectedOntError):
        path_to_ont(orphan, "ont-c")


def test_valid_tree_has_no_violations(small_tree):
    assert validate_topology(small_tree) == []


def test_onts_sorted_and_root_lookup(small_tree):
    assert [n.id for n in small_tree.onts()] == ["ont-a", "ont-b"]
    assert small_tree.root_node.id == "co"


def _tree(nodes, segments, splitters=(), **kw):
    return PonTree(root_port="co/1/1", nodes=nodes, segments=segments, splitters=splitters, **kw)


N_CO = OdnNode(id="co", kind=NodeKind.CENTRAL_OFFICE_OLT, position=(0.0, 0.0))
N_HUB = OdnNode(id="hub", kind=NodeKind.FDH, position=(0.01, 0.0))
N_ONT = OdnNode(id="ont", kind=NodeKind.ONT, position=(0.02, 0.0))


def seg(id, a, b, role=SegmentRole.FEEDER, fibers=2, length=1.0, **kw):
    return FiberSegment(
        id=id, from_node=a, to_node=b, role=role, fiber_count=fibers, length_km=length, **kw
    )


def test_duplicate_node_and_segment_ids():
    tree = _tree(
        (N_CO, N_HUB, OdnNode(id="hub", kind=NodeKind.FAT, position=(0.03, 0.0))),
        (seg("f1", "co", "hub"), seg("f1", "co", "hub")),
    )
    got = codes(validate_topology(tree))
    assert "DuplicateNodeId" in got
    assert "DuplicateSegmentId" in got


def test_unknown_node_reference_and_missing_length():
    tree = _tree(
        (N_CO, N_HUB),
        (
            seg("f1", "co", "ghost"),
            FiberSegment(id="f2", from_node="co", to_node="hub", role=SegmentRole.FEEDER, fiber_count=2),
        ),
    )
    got = codes(validate_topology(tree))
    assert "UnknownNodeReference" in got
    assert "MissingLength" in got


def test_cable_size_warnings():
    tree = _tree(
        (N_CO, N_HUB, N_ONT),
        (
            seg("f1", "co", "hub", fibers=12),  # not on the ladder
            seg("d1", "hub", "ont", role=SegmentRole.DROP, fibers=6, length=0.1),
        ),
    )
    got = validate_topology(tree)
    assert {"NonStandardCable", "DropFiberCount"} <= {v.code for v in got}
    assert all(v.severity == "warning" for v in got if v.code in ("NonStandardCable", "DropFiberCount"))
    # the escape hatch silences both
    tree2 = _tree(
        (N_CO, N_HUB, N_ONT),
        (
            seg("f1", "co", "hub", fibers=12, nonstandard_fiber_count=True),
            seg("d1", "hub", "ont", role=SegmentRole.DROP, fibers=6, length=0.1, nonstandard_fiber_count=True),
        ),
    )
    assert validate_topology(tree2) == []


def test_missing_and_multiple_roots():
    no_root = PonTree(root_port="x/1/1", nodes=(N_HUB, N_ONT), segments=(seg("d", "hub", "ont", role=SegmentRole.DROP, length=0.1),))
    assert "MissingRoot" in codes(validate_topology(no_root))
    two = _tree(
        (N_CO, OdnNode(id="co2", kind=NodeKind.CENTRAL_OFFICE_OLT, position=(0.05, 0.0)), N_HUB),
        (seg("f1", "co", "hub"), seg("f2", "co2", "hub")),
    )
    assert "MultipleRoots" in codes(validate_topology(two))


def test_cycle_detected():
    mh = OdnNode(id="mh", kind=NodeKind.MANHOLE, position=(0.015, 0.001))
    tree = _tree(
        (N_CO, N_HUB, mh),
        (seg("f1", "co", "hub"), seg("f2", "hub", "mh", length=0.2), seg("f3", "mh", "co", length=0.9)),
    )
    assert "CycleDetected" in codes(validate_topology(tree))


def test_disconnected_node_and_ont():
    tree = _tree(
        (N_CO, N_HUB, N_ONT, OdnNode(id="mh", kind=NodeKind.MANHOLE, position=(0.05, 0.05))),
        (seg("f1", "co", "hub"),),
    )
    got = codes(validate_topology(tree))
    assert "DisconnectedOnt" in got
    assert "DisconnectedNode" in got


def test_standby_only_structure_is_connected():
    """Protection segments count for structure reachability, not for ONTs."""
    mh = OdnNode(id="mh", kind=NodeKind.MANHOLE, position=(0.005, 0.002))
    tree = _tree(
        (N_CO, N_HUB, mh),
        (
            seg("f1", "co", "hub"),
            seg("p1", "co", "mh", length=0.6, protection=True),
            seg("p2", "mh", "hub", length=0.6, protection=True),
        ),
        splitters=(SplitterSpec(node_id="hub", output_ports=2, input_ports=2),),
    )
    assert validate_topology(tree) == []


def test_splitter_level_order_and_split_cap():
    fat = OdnNode(id="fat", kind=NodeKind.FAT, position=(0.015, 0.0))
    nodes = (N_CO, N_HUB, fat, N_ONT)
    segments = (
        seg("f1", "co", "hub"),
        seg("t1", "hub", "fat", role=SegmentRole.DISTRIBUTION, length=0.3),
        seg("d1", "fat", "ont", role=SegmentRole.DROP, length=0.05),
    )
    bad_order = _tree(
        nodes, segments,
        splitters=(
            SplitterSpec(node_id="hub", output_ports=2, level=2),
            SplitterSpec(node_id="fat", output_ports=16, level=1),
        ),
    )
    assert "SplitterLevelOrder" in codes(validate_topology(bad_order))
    over_cap = _tree(
        nodes, segments,
        splitters=(
            SplitterSpec(node_id="hub", output_ports=64, level=1),
            SplitterSpec(node_id="fat", output_ports=2, level=2),
        ),
    )
    assert "SplitCapExceeded" in codes(validate_topology(over_cap))


def test_reach_exceeded():
    tree = _tree(
        (N_CO, N_HUB, N_ONT),
        (
            seg("f1", "co", "hub", length=20.5),
            seg("d1", "hub", "ont", role=SegmentRole.DROP, length=0.5),
        ),
    )
    assert "ReachExceeded" in codes(validate_topology(tree))
    ok = _tree(
        (N_CO, N_HUB, N_ONT),
        (
            seg("f1", "co", "hub", length=19.0),
            seg("d1", "hub", "ont", role=SegmentRole.DROP, length=1.0),
        ),
        physical_reach_limit_km=20,
    )
    assert "ReachExceeded" not in codes(validate_topology(ok))


def test_splitter_oversubscribed():
    onts = tuple(
        OdnNode(id=f"ont-{i}", kind=NodeKind.ONT, position=(0.02, i / 1000)) for i in range(3)
    )
    tree = _tree(
        (N_CO, N_HUB) + onts,
        (seg("f1", "co", "hub"),)
        + tuple(seg(f"d{i}", "hub", f"ont-{i}", role=SegmentRole.DROP, length=0.1) for i in range(3)),
        splitters=(SplitterSpec(node_id="hub", output_ports=2),),
    )
    assert "SplitterOversubscribed" in codes(validate_topology(tree))


def test_ont_not_leaf():
    tree = _tree(
        (N_CO, N_ONT, OdnNode(id="ont2", kind=NodeKind.ONT, position=(0.03, 0.0))),
        (
            seg("d1", "co", "ont", role=SegmentRole.DROP, length=0.1),
            seg("d2", "ont", "ont2", role=SegmentRole.DROP, length=0.1),
        ),
    )
    assert "OntNotLeaf" in codes(validate_topology(tree))


def test_fiber_count_exceeded():
    onts = tuple(
        OdnNode(id=f"ont-{i}", kind=NodeKind.ONT, position=(0.02, i / 1000)) for i in range(3)
    )
    mh = OdnNode(id="mh", kind=NodeKind.JOINT_BOX, position=(0.01, 0.0))
    tree = _tree(
        (N_CO, mh) + onts,
        (seg("f1", "co", "mh", fibers=2),)
        + tuple(seg(f"d{i}", "mh", f"ont-{i}", role=SegmentRole.DROP, length=0.1) for i in range(3)),
    )
    # three lit fibers through a 2F feeder
    assert "FiberCountExceeded" in codes(validate_topology(tree))


def test_violation_serialization(small_tree):
    bad = _tree((N_CO, N_ONT), (seg("d1", "co", "ghost", role=SegmentRole.DROP, length=0.1),))
    v = validate_topology(bad)[0]
    d = v.to_dict()
    assert set(d) == {"code", "severity", "subject_id", "message", "rule_ref"}
