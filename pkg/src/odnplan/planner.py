"""Rule-based planning on top of the core model.

Covers the judgment calls a desk planner makes before construction:
which FDH serves which demand cluster, whether drawn plant breaks the
placement rules (direct-feed radius, OLT boundary overlap, reach, drum
length, splitter depth), standby-route protection, FTTx classification,
and ready-made topology skeletons for the common deployment scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Sequence

from shapely.geometry import Polygon, shape

from .errors import (
    InsufficientCapacityError,
    InvalidParamsError,
    InvalidPlanError,
    MissingAlternateRouteError,
    RoutesNotDisjointError,
    UnknownOntError,
)
from .geodata import PlanDocument, plan_from_trees
from .geomath import Coordinate, haversine_km
from .model import (
    DEFAULT_SPLIT_CAP,
    FiberSegment,
    MAX_SPLITTER_LEVELS,
    NodeKind,
    OdnNode,
    PonTree,
    SegmentRole,
    SPLITTER_OUTPUT_SIZES,
    SplitterSpec,
    Violation,
    path_to_ont,
    to_decimal,
    validate_topology,
)

DEFAULT_DRUM_LENGTH_KM = 2.0
DIRECT_FEED_RADIUS_KM = 0.5

# Rough degrees-per-km at low latitude, used only to lay out synthetic
# scenario geometry; real lengths ride on the segments themselves.
_DEG_PER_KM = 1.0 / 111.0


class ProtectionType(Enum):
    """Redundancy grades: A none, B standby feeder, C standby feeder+distribution."""

    TYPE_A = "type_a"
    TYPE_B = "type_b"
    TYPE_C = "type_c"


class FttxVariant(Enum):
    FTTB = "fttb"
    FTTC = "fttc"
    FTTH = "ftth"
    FTTM = "fttm"


_TERMINAL_VARIANTS = {
    "building": FttxVariant.FTTB,
    "riser": FttxVariant.FTTB,
    "curb": FttxVariant.FTTC,
    "cabinet": FttxVariant.FTTC,
    "home": FttxVariant.FTTH,
    "house": FttxVariant.FTTH,
    "villa": FttxVariant.FTTH,
    "bts": FttxVariant.FTTM,
    "mobile": FttxVariant.FTTM,
}


@dataclass(frozen=True)
class SplitterSetting:
    """How deep splitters may cascade under one PON port."""

    style: str
    max_levels: int

    def __post_init__(self):
        if self.style not in ("centralized", "n_level", "dispersed"):
            raise ValueError(f"unknown splitter setting style {self.style!r}")
        if not 1 <= self.max_levels <= MAX_SPLITTER_LEVELS:
            raise ValueError("max_levels must be within 1..3")

    @classmethod
    def centralized(cls) -> "SplitterSetting":
        return cls("centralized", 1)

    @classmethod
    def n_level(cls, levels: int) -> "SplitterSetting":
        return cls("n_level", levels)

    @classmethod
    def dispersed(cls) -> "SplitterSetting":
        return cls("dispersed", MAX_SPLITTER_LEVELS)


@dataclass(frozen=True)
class ServiceArea:
    """A demand polygon a single FDH is meant to serve."""

    id: str
    polygon: tuple  # closed ring of (lon, lat)
    demand_tenants: int = 0
    assigned_fdh: Optional[str] = None

    def __post_init__(self):
        ring = tuple((float(x), float(y)) for x, y in self.polygon)
        if len(ring) < 4 or ring[0] != ring[-1]:
            raise ValueError(f"service area {self.id!r} ring must be closed (first == last)")
        if not Polygon(ring).is_valid:
            raise ValueError(f"service area {self.id!r} polygon is self-intersecting")
        if self.demand_tenants < 0:
            raise ValueError("demand_tenants must be >= 0")
        object.__setattr__(self, "polygon", ring)

    @property
    def shape(self) -> Polygon:
        return Polygon(self.polygon)


@dataclass(frozen=True)
class DemandPoint:
    id: str
    position: Coordinate
    tenants: int

    def __post_init__(self):
        if self.tenants < 0:
            raise ValueError("tenants must be >= 0")


@dataclass(frozen=True)
class FdhSite:
    id: str
    position: Coordinate
    capacity_tenants: int

    def __post_init__(self):
        if self.capacity_tenants < 0:
            raise ValueError("capacity_tenants must be >= 0")


def service_areas(plan: PlanDocument) -> list[ServiceArea]:
    """Parse the service_areas layer into typed polygons."""
    out = []
    for feature in plan.layer("service_areas").get("features", []):
        props = feature.get("properties") or {}
        odn = props.get("odn") or {}
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Polygon":
            continue
        ring = tuple(tuple(pt) for pt in geom["coordinates"][0])
        out.append(
            ServiceArea(
                id=str(odn.get("id") or feature.get("id")),
                polygon=ring,
                demand_tenants=int(odn.get("tenants", 0)),
                assigned_fdh=odn.get("assigned_fdh"),
            )
        )
    return out


def demand_points_from_areas(areas: Sequence[ServiceArea]) -> list[DemandPoint]:
    """One demand point per area, placed at the polygon centroid."""
    points = []
    for area in areas:
        c = area.shape.centroid
        points.append(DemandPoint(id=area.id, position=(c.x, c.y), tenants=area.demand_tenants))
    return points


def assign_fdh_areas(demand_points, fdh_sites) -> dict[str, str]:
    """Greedy nearest-feasible assignment of demand points to FDH sites.

    Points are taken in decreasing-tenant order (ties by id) and each
    goes whole to the nearest FDH with enough remaining capacity, ties
    broken by smallest FDH id. Deterministic by construction. Raises
    InsufficientCapacity when anything is left unassigned, either
    because total capacity falls short or because fragmentation strands
    a point; the error carries both the residual and the partial result.
    """
    points = [_coerce_demand(p, i) for i, p in enumerate(demand_points)]
    sites = [_coerce_site(s) for s in fdh_sites]
    if len({p.id for p in points}) != len(points):
        raise ValueError("demand point ids must be unique")
    if len({s.id for s in sites}) != len(sites):
        raise ValueError("fdh site ids must be unique")

    remaining = {s.id: s.capacity_tenants for s in sites}
    assigned: dict[str, str] = {}
    unassigned: dict[str, int] = {}
    for point in sorted(points, key=lambda p: (-p.tenants, p.id)):
        feasible = [s for s in sites if remaining[s.id] >= point.tenants]
        if not feasible:
            unassigned[point.id] = point.tenants
            continue
        best = min(feasible, key=lambda s: (haversine_km(point.position, s.position), s.id))
        assigned[point.id] = best.id
        remaining[best.id] -= point.tenants
    if unassigned:
        residual = sum(unassigned.values())
        raise InsufficientCapacityError(
            f"{residual} tenant(s) in {len(unassigned)} demand point(s) cannot be assigned",
            unassigned=unassigned,
            assigned=assigned,
        )
    return assigned


def _coerce_demand(value, index: int) -> DemandPoint:
    if isinstance(value, DemandPoint):
        return value
    position, tenants = value
    return DemandPoint(id=f"dp-{index + 1}", position=tuple(position), tenants=int(tenants))


def _coerce_site(value) -> FdhSite:
    if isinstance(value, FdhSite):
        return value
    site_id, position, capacity = value
    return FdhSite(id=str(site_id), position=tuple(position), capacity_tenants=int(capacity))


# ------------------------- placement rules -------------------------


def olt_boundaries(plan: PlanDocument) -> list[tuple[str, Polygon]]:
    """(id, polygon) pairs from the olt_boundaries layer, sorted by id."""
    out = []
    for feature in plan.layer("olt_boundaries").get("features", []):
        props = feature.get("properties") or {}
        odn = props.get("odn") or {}
        geom = feature.get("geometry") or {}
        if geom.get("type") not in ("Polygon", "MultiPolygon"):
            continue
        out.append((str(odn.get("id") or feature.get("id")), shape(geom)))
    out.sort(key=lambda pair: pair[0])
    return out


def check_rules(
    plan: PlanDocument,
    *,
    drum_length_km: float = DEFAULT_DRUM_LENGTH_KM,
    direct_feed_km: float = DIRECT_FEED_RADIUS_KM,
    setting: Optional[SplitterSetting] = None,
) -> list[Violation]:
    """Placement-rule audit of a drawn plan.

    Emits DirectFeedMissed, OltOverlap, ReachExceeded, DrumLengthWarning
    and, when a splitter setting is given, SplitterLevelExceeded. Output
    order is stable for identical input.
    """
    out: list[Violation] = []

    boundaries = olt_boundaries(plan)
    for i, (id_a, poly_a) in enumerate(boundaries):
        for id_b, poly_b in boundaries[i + 1 :]:
            if poly_a.intersection(poly_b).area > 0:
                out.append(
                    Violation.error(
                        "OltOverlap", f"{id_a}|{id_b}",
                        f"OLT boundaries {id_a!r} and {id_b!r} overlap with positive area",
                    )
                )

    drum = to_decimal(drum_length_km)
    for seg in plan.segments:
        length = seg.effective_length_km
        if length is not None and length > drum:
            out.append(
                Violation.warning(
                    "DrumLengthWarning", seg.id,
                    f"segment {seg.id!r} runs {length} km, over the {drum} km drum length; "
                    "plan an extra joint",
                )
            )

    for tree in plan.trees:
        try:
            root = tree.root_node
        except ValueError:
            continue  # unrooted trees are validate_topology's problem
        for ont in tree.onts():
            try:
                path = path_to_ont(tree, ont.id)
            except Exception:
                continue
            if path.length_km > tree.physical_reach_limit_km:
                out.append(
                    Violation.error(
                        "ReachExceeded", ont.id,
                        f"path to {ont.id!r} is {path.length_km} km, over the "
                        f"{tree.physical_reach_limit_km} km reach limit",
                    )
                )
            crow_km = haversine_km(root.position, ont.position)
            if crow_km <= direct_feed_km:
                visited = {ref for seg in path.segments for ref in (seg.from_node, seg.to_node)}
                visited -= {root.id, ont.id}
                hubs = {tree.nodes_by_id[nid].kind for nid in visited if nid in tree.nodes_by_id}
                if NodeKind.FDH in hubs or NodeKind.FAT in hubs:
                    out.append(
                        Violation.error(
                            "DirectFeedMissed", ont.id,
                            f"ONT {ont.id!r} sits {crow_km:.3f} km (geodesic) from the "
                            f"central office yet is routed through an FDH/FAT; customers "
                            f"within {direct_feed_km} km should be fed directly",
                        )
                    )
            if setting is not None and len(path.splitters) > setting.max_levels:
                out.append(
                    Violation.error(
                        "SplitterLevelExceeded", ont.id,
                        f"path to {ont.id!r} cascades {len(path.splitters)} splitter levels, "
                        f"over the {setting.max_levels} allowed by the "
                        f"{setting.style} setting",
                    )
                )
    return out


# ------------------------- protection -------------------------


@dataclass(frozen=True)
class AlternateRoute:
    """Standby path for protection: new plant plus the segments walking it.

    The segment chain must run between the protected hub and one of its
    ancestors on the working route (usually the central office). Any
    nodes the chain introduces ride along in `nodes`.
    """

    segments: tuple
    nodes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.segments:
            raise ValueError("an alternate route needs at least one segment")


def apply_protection(
    tree: PonTree,
    ptype: ProtectionType,
    alternate_routes: Optional[Mapping[str, AlternateRoute]] = None,
) -> PonTree:
    """Add standby routes and dual-feed splitters for the given grade.

    Type A is unprotected and returns the tree unchanged. Type B needs
    an alternate feeder route per first-level splitter hub; Type C needs
    one per splitter hub at every level. Protected splitters gain a
    second input port; standby segments are flagged `protection` so they
    stay out of the working topology. A tree with no splitters has
    nothing to protect and passes through unchanged.
    """
    if ptype is ProtectionType.TYPE_A:
        return tree
    if not tree.splitters:
        return tree
    routes = dict(alternate_routes or {})
    if ptype is ProtectionType.TYPE_B:
        hosts = [s.node_id for s in tree.splitters if s.level == 1]
    else:
        hosts = [s.node_id for s in tree.splitters]
    hosts.sort()

    new_nodes = list(tree.nodes)
    known_ids = {n.id for n in new_nodes}
    new_segments = list(tree.segments)
    segment_ids = {s.id for s in new_segments}
    protected: set[str] = set()

    for host in hosts:
        route = routes.get(host)
        if route is None:
            raise MissingAlternateRouteError(
                f"{ptype.value} protection needs an alternate route for hub {host!r}"
            )
        start = _route_endpoints(route, host)
        primary = _working_route(tree, host)
        if start not in primary.node_chain:
            raise RoutesNotDisjointError(
                f"alternate route for {host!r} starts at {start!r}, which is not on "
                "the working route to the central office"
            )
        idx = primary.node_chain.index(start)
        prim_nodes = set(primary.node_chain[idx + 1 : -1])  # between start and host
        prim_segs = set(primary.segment_ids[idx:])
        alt_intermediate = {
            ref
            for seg in route.segments
            for ref in (seg.from_node, seg.to_node)
            if ref not in (start, host)
        }
        for seg in route.segments:
            if seg.id in segment_ids:
                raise RoutesNotDisjointError(
                    f"alternate route for {host!r} reuses segment {seg.id!r}"
                )
            if seg.id in prim_segs:
                raise RoutesNotDisjointError(
                    f"alternate route for {host!r} shares segment {seg.id!r} with the working route"
                )
        shared_nodes = alt_intermediate & prim_nodes
        if shared_nodes:
            raise RoutesNotDisjointError(
                f"alternate route for {host!r} passes through working-route "
                f"node(s) {sorted(shared_nodes)}"
            )
        for node in route.nodes:
            if node.id not in known_ids:
                new_nodes.append(node)
                known_ids.add(node.id)
        unknown = {
            ref
            for seg in route.segments
            for ref in (seg.from_node, seg.to_node)
            if ref not in known_ids
        }
        if unknown:
            raise ValueError(
                f"alternate route for {host!r} references undeclared node(s) {sorted(unknown)}"
            )
        for seg in route.segments:
            stamped = seg if seg.protection else replace(seg, protection=True)
            new_segments.append(stamped)
            segment_ids.add(stamped.id)
        protected.add(host)

    new_splitters = tuple(
        replace(s, input_ports=2) if s.node_id in protected and s.input_ports != 2 else s
        for s in tree.splitters
    )
    result = replace(tree, nodes=tuple(new_nodes), segments=tuple(new_segments), splitters=new_splitters)
    errors = [v for v in validate_topology(result) if v.severity == "error"]
    if errors:
        raise InvalidPlanError("protected tree fails topology validation", errors)
    return result


@dataclass(frozen=True)
class _Route:
    node_chain: tuple  # root .. host
    segment_ids: tuple


def _working_route(tree: PonTree, node_id: str) -> _Route:
    parents = tree._parents
    if node_id not in parents:
        raise ValueError(f"node {node_id!r} is not connected to the root")
    chain = []
    seg_ids = []
    cur = node_id
    while cur is not None:
        chain.append(cur)
        parent, seg = parents[cur]
        if seg is not None:
            seg_ids.append(seg.id)
        cur = parent
    chain.reverse()
    seg_ids.reverse()
    return _Route(node_chain=tuple(chain), segment_ids=tuple(seg_ids))


def _route_endpoints(route: AlternateRoute, host: str) -> str:
    degree: dict[str, int] = {}
    for seg in route.segments:
        for ref in (seg.from_node, seg.to_node):
            degree[ref] = degree.get(ref, 0) + 1
    ends = sorted(ref for ref, n in degree.items() if n == 1)
    if len(ends) != 2:
        raise ValueError(
            f"alternate route for {host!r} must be a simple chain with two endpoints, "
            f"found {ends or 'none'}"
        )
    if host not in ends:
        raise ValueError(f"alternate route for {host!r} does not terminate at the hub")
    return ends[0] if ends[1] == host else ends[1]


# ------------------------- FTTx classification -------------------------


def classify_fttx(tree: PonTree, ont_id: str) -> FttxVariant:
    """Variant from the ONT's terminal tag; untagged terminals are FTTH."""
    node = tree.nodes_by_id.get(ont_id)
    if node is None or node.kind is not NodeKind.ONT:
        raise UnknownOntError(f"no ONT with id {ont_id!r} in tree {tree.root_port!r}")
    if node.terminal is None:
        return FttxVariant.FTTH
    return _TERMINAL_VARIANTS.get(node.terminal.strip().lower(), FttxVariant.FTTH)


# ------------------------- scenario templates -------------------------


class ScenarioName(Enum):
    VILLAS_OUTDOOR_FDH = "villas_outdoor_fdh"
    HIGH_RISE_INDOOR_FDH = "high_rise_indoor_fdh"
    SMALL_BUILDING_WALL_FDH = "small_building_wall_fdh"
    SMALL_BUILDING_OUTDOOR_FDH = "small_building_outdoor_fdh"


@dataclass(frozen=True)
class ScenarioParams:
    """Knobs for a scenario skeleton; distances are km."""

    tenants: int
    split_ratios: Optional[tuple] = None  # template default when omitted
    feeder_km: float = 1.5
    distribution_km: float = 0.4
    drop_km: float = 0.05
    origin: Coordinate = (0.0, 0.0)
    terminal: Optional[str] = None
    id_prefix: str = ""


# shape: "grouped" fans drops out of passive FATs; "direct" drops straight
# off the FDH; "two_level" cascades a second splitter at the mid hub.
_TEMPLATES = {
    ScenarioName.VILLAS_OUTDOOR_FDH: {
        "shape": "grouped",
        "ratios": (32,),
        "terminal": "villa",
        "mid_kind": NodeKind.FAT,
    },
    ScenarioName.HIGH_RISE_INDOOR_FDH: {
        "shape": "two_level",
        "ratios": (2, 32),
        "terminal": "building",
        "mid_kind": NodeKind.MICRO_ODF,
    },
    ScenarioName.SMALL_BUILDING_WALL_FDH: {
        "shape": "direct",
        "ratios": (16,),
        "terminal": "building",
        "mid_kind": None,
    },
    ScenarioName.SMALL_BUILDING_OUTDOOR_FDH: {
        "shape": "two_level",
        "ratios": (2, 16),
        "terminal": "building",
        "mid_kind": NodeKind.FAT,
    },
}

_DROPS_PER_FAT = 8


def scenario_template(name, params: ScenarioParams) -> PlanDocument:
    """Topology skeleton for one of the four standard deployment scenarios.

    The result is a single-tree PlanDocument ready for budgeting and
    dimensioning; it always passes validate_topology cleanly.
    """
    key = name if isinstance(name, ScenarioName) else ScenarioName(str(name))
    cfg = _TEMPLATES[key]
    ratios = tuple(params.split_ratios) if params.split_ratios else cfg["ratios"]
    _check_params(key, cfg, ratios, params)

    prefix = params.id_prefix
    terminal = params.terminal or cfg["terminal"]
    lon0, lat0 = params.origin
    feeder = to_decimal(params.feeder_km)
    distribution = to_decimal(params.distribution_km)
    drop = to_decimal(params.drop_km)

    co = OdnNode(id=f"{prefix}co", kind=NodeKind.CENTRAL_OFFICE_OLT, position=(lon0, lat0))
    fdh_lon = lon0 + float(feeder) * _DEG_PER_KM
    fdh = OdnNode(id=f"{prefix}fdh", kind=NodeKind.FDH, position=(fdh_lon, lat0))
    nodes = [co, fdh]
    segments = [
        FiberSegment(
            id=f"{prefix}feeder-1",
            from_node=co.id,
            to_node=fdh.id,
            role=SegmentRole.FEEDER,
            fiber_count=2,
            length_km=feeder,
            connector_count=1,
        )
    ]
    splitters = [SplitterSpec(node_id=fdh.id, output_ports=ratios[0], level=1)]

    if cfg["shape"] == "direct":
        _fan_drops(nodes, segments, fdh, range(params.tenants), drop, terminal, prefix)
    else:
        if cfg["shape"] == "grouped":
            group = _DROPS_PER_FAT
        else:
            group = ratios[1]
        hub_count = -(-params.tenants // group)
        hub_lon = fdh_lon + float(distribution) * _DEG_PER_KM
        for h in range(hub_count):
            hub = OdnNode(
                id=f"{prefix}hub-{h + 1}",
                kind=cfg["mid_kind"],
                position=(hub_lon, lat0 + (h - (hub_count - 1) / 2) * 0.001),
            )
            nodes.append(hub)
            members = range(h * group, min((h + 1) * group, params.tenants))
            segments.append(
                FiberSegment(
                    id=f"{prefix}dist-{h + 1}",
                    from_node=fdh.id,
                    to_node=hub.id,
                    role=SegmentRole.DISTRIBUTION,
                    fiber_count=2 if cfg["shape"] == "two_level" else 8,
                    length_km=distribution,
                    connector_count=1,
                )
            )
            if cfg["shape"] == "two_level":
                splitters.append(SplitterSpec(node_id=hub.id, output_ports=ratios[1], level=2))
            _fan_drops(nodes, segments, hub, members, drop, terminal, prefix)

    tree = PonTree(
        root_port=f"{co.id}/1/1",
        nodes=tuple(nodes),
        segments=tuple(segments),
        splitters=tuple(splitters),
    )
    return plan_from_trees([tree])


def _fan_drops(nodes, segments, hub, members, drop_km, terminal, prefix):
    listing = list(members)
    for j, idx in enumerate(listing):
        ont = OdnNode(
            id=f"{prefix}ont-{idx + 1:03d}",
            kind=NodeKind.ONT,
            position=(
                hub.position[0] + float(drop_km) * _DEG_PER_KM,
                hub.position[1] + (j - (len(listing) - 1) / 2) * 0.0001,
            ),
            terminal=terminal,
        )
        nodes.append(ont)
        segments.append(
            FiberSegment(
                id=f"{prefix}drop-{idx + 1:03d}",
                from_node=hub.id,
                to_node=ont.id,
                role=SegmentRole.DROP,
                fiber_count=2,
                length_km=drop_km,
                connector_count=1,
                splice_count=1,
            )
        )


def _check_params(key, cfg, ratios, params: ScenarioParams):
    if params.tenants < 1:
        raise InvalidParamsError("tenants must be >= 1")
    expected_levels = 2 if cfg["shape"] == "two_level" else 1
    if len(ratios) != expected_levels:
        raise InvalidParamsError(
            f"{key.value} expects {expected_levels} split ratio(s), got {len(ratios)}"
        )
    for r in ratios:
        if r not in SPLITTER_OUTPUT_SIZES:
            raise InvalidParamsError(f"no manufactured 1:{r} splitter; sizes: {SPLITTER_OUTPUT_SIZES}")
    capacity = 1
    for r in ratios:
        capacity *= r
    if capacity > DEFAULT_SPLIT_CAP:
        raise InvalidParamsError(
            f"total split {capacity} exceeds the {DEFAULT_SPLIT_CAP}-way budget cap"
        )
    if params.tenants > capacity:
        raise InvalidParamsError(
            f"{params.tenants} tenants exceed the {capacity} drops one PON tree can serve"
        )
    for label, value in (
        ("feeder_km", params.feeder_km),
        ("distribution_km", params.distribution_km),
        ("drop_km", params.drop_km),
    ):
        if to_decimal(value) <= 0:
            raise InvalidParamsError(f"{label} must be positive")
