import time
from pathlib import Path

import pytest

from odnplan import (
    FiberSegment,
    NodeKind,
    OdnNode,
    PonTree,
    ScenarioName,
    ScenarioParams,
    SegmentRole,
    SplitterSpec,
    preset,
    save_bundle,
    scenario_template,
)

FIXTURES = Path(__file__).parent / "fixtures"

SUITE_BUDGET_SECONDS = 60


@pytest.fixture(scope="session", autouse=True)
def suite_runtime_budget():
    """The whole run must stay desk-scale; fails teardown if it drags."""
    start = time.monotonic()
    yield
    elapsed = time.monotonic() - start
    assert elapsed < SUITE_BUDGET_SECONDS, f"suite took {elapsed:.1f}s"


@pytest.fixture(scope="session")
def theoretical():
    return preset("theoretical")


@pytest.fixture(scope="session")
def practical():
    return preset("practical")


@pytest.fixture
def villas_plan():
    """Outdoor-FDH villas skeleton, 32 drops behind a 1:32."""
    return scenario_template(ScenarioName.VILLAS_OUTDOOR_FDH, ScenarioParams(tenants=32))


@pytest.fixture
def villas_bundle(villas_plan, tmp_path):
    return str(save_bundle(villas_plan, tmp_path / "villas"))


@pytest.fixture
def small_tree():
    """co -> fdh(1:2) -> two onts, explicit lengths."""
    nodes = (
        OdnNode(id="co", kind=NodeKind.CENTRAL_OFFICE_OLT, position=(10.0, 50.0)),
        OdnNode(id="hub", kind=NodeKind.FDH, position=(10.014, 50.0)),
        OdnNode(id="ont-a", kind=NodeKind.ONT, position=(10.017, 50.0005)),
        OdnNode(id="ont-b", kind=NodeKind.ONT, position=(10.017, 49.9995)),
    )
    segments = (
        FiberSegment(
            id="f1", from_node="co", to_node="hub", role=SegmentRole.FEEDER,
            fiber_count=2, length_km=1.0, connector_count=1,
        ),
        FiberSegment(
            id="d1", from_node="hub", to_node="ont-a", role=SegmentRole.DROP,
            fiber_count=2, length_km=0.25, connector_count=1, splice_count=1,
        ),
        FiberSegment(
            id="d2", from_node="hub", to_node="ont-b", role=SegmentRole.DROP,
            fiber_count=2, length_km=0.3, connector_count=1, splice_count=1,
        ),
    )
    splitters = (SplitterSpec(node_id="hub", output_ports=2, level=1),)
    return PonTree(root_port="co/1/1", nodes=nodes, segments=segments, splitters=splitters)
