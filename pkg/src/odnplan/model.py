"""Core ODN domain model: nodes, cables, splitters, and per-port trees.

A PonTree describes the passive plant hanging off a single OLT PON port:
one central office node at the root, splice and splitter sites below it,
and ONTs at the leaves. Topology problems are reported as Violation
records so a whole plan can be checked in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .errors import DisconnectedOntError, UnknownOntError
from .geomath import Coordinate, polyline_length_km

# Standard cable sizes (fiber counts) stocked for feeder/distribution runs.
STANDARD_FIBER_COUNTS = (2, 8, 16, 24, 48, 96)

# Manufactured splitter sizes; 1:1 does not exist.
SPLITTER_OUTPUT_SIZES = (2, 4, 8, 16, 32, 64)

# Default cap on the multiplied split along any root-to-ONT path.
DEFAULT_SPLIT_CAP = 64

MAX_SPLITTER_LEVELS = 3


def to_decimal(value) -> Decimal:
    """Exact decimal view of a number; floats go through their shortest repr."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(str(value))


class NodeKind(Enum):
    CENTRAL_OFFICE_OLT = "central_office_olt"
    FDH = "fdh"
    FAT = "fat"
    JOINT_BOX = "joint_box"
    MICRO_ODF = "micro_odf"
    MANHOLE = "manhole"
    HANDHOLE = "handhole"
    ONT = "ont"


class SegmentRole(Enum):
    FEEDER = "feeder"
    DISTRIBUTION = "distribution"
    DROP = "drop"


@dataclass(frozen=True)
class OdnNode:
    """A located piece of plant: cabinet, closure, office, or terminal."""

    id: str
    kind: NodeKind
    position: Coordinate  # (lon, lat) in WGS84 degrees
    label: Optional[str] = None
    terminal: Optional[str] = None  # deployment context tag on ONTs

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not isinstance(self.kind, NodeKind):
            raise ValueError(f"node {self.id}: kind must be a NodeKind")
        lon, lat = self.position
        if not (math.isfinite(lon) and math.isfinite(lat)):
            raise ValueError(f"node {self.id}: position must be finite")
        if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
            raise ValueError(f"node {self.id}: lon/lat out of range: {self.position}")
        object.__setattr__(self, "position", (float(lon), float(lat)))


@dataclass(frozen=True)
class FiberSegment:
    """A cable run between two nodes.

    length_km wins over geometry when both are present; the geometry then
    only serves mapping. A protection segment is a standby route added by
    Type B/C designs and is excluded from tree-shape checks.
    """

    id: str
    from_node: str
    to_node: str
    role: SegmentRole
    fiber_count: int
    length_km: object = None  # float or Decimal, km
    geometry: Optional[tuple[Coordinate, ...]] = None
    splice_count: int = 0
    connector_count: int = 0
    nonstandard_fiber_count: bool = False
    protection: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("segment id must be non-empty")
        if not isinstance(self.role, SegmentRole):
            raise ValueError(f"segment {self.id}: role must be a SegmentRole")
        if int(self.fiber_count) < 1:
            raise ValueError(f"segment {self.id}: fiber_count must be positive")
        if self.splice_count < 0 or self.connector_count < 0:
            raise ValueError(f"segment {self.id}: splice/connector counts must be >= 0")
        if self.length_km is not None and to_decimal(self.length_km) < 0:
            raise ValueError(f"segment {self.id}: length_km must be >= 0")
        if self.geometry is not None:
            pts = tuple((float(p[0]), float(p[1])) for p in self.geometry)
            if len(pts) < 2:
                raise ValueError(f"segment {self.id}: geometry needs at least 2 points")
            object.__setattr__(self, "geometry", pts)

    @property
    def effective_length_km(self) -> Optional[Decimal]:
        """Declared length when present, else geodesic length of the geometry."""
        if self.length_km is not None:
            return to_decimal(self.length_km)
        if self.geometry is not None:
            return to_decimal(polyline_length_km(self.geometry))
        return None


@dataclass(frozen=True)
class SplitterSpec:
    """A splitter installed at a node. input_ports is 2 only under

    Type B/C protection designs; output_ports comes from the manufactured
    size set, so a 1:1 device cannot be expressed.
    """

    node_id: str
    output_ports: int
    level: int = 1  # 1..3, position in the cascade
    input_ports: int = 1

    def __post_init__(self):
        if not self.node_id:
            raise ValueError("splitter node_id must be non-empty")
        if self.output_ports not in SPLITTER_OUTPUT_SIZES:
            raise ValueError(
                f"splitter at {self.node_id}: output_ports must be one of "
                f"{SPLITTER_OUTPUT_SIZES}, got {self.output_ports}"
            )
        if self.input_ports not in (1, 2):
            raise ValueError(f"splitter at {self.node_id}: input_ports must be 1 or 2")
        if not 1 <= self.level <= MAX_SPLITTER_LEVELS:
            raise ValueError(
                f"splitter at {self.node_id}: level must be 1..{MAX_SPLITTER_LEVELS}"
            )


@dataclass(frozen=True)
class Violation:
    """One topology or planning rule breach. severity is error or warning."""

    code: str
    severity: str
    subject_id: str
    message: str
    rule_ref: str = ""

    @classmethod
    def error(cls, code: str, subject_id: str, message: str, rule_ref: str = "") -> "Violation":
        return cls(code, "error", subject_id, message, rule_ref)

    @classmethod
    def warning(cls, code: str, subject_id: str, message: str, rule_ref: str = "") -> "Violation":
        return cls(code, "warning", subject_id, message, rule_ref)

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "subject_id": self.subject_id,
            "message": self.message,
            "rule_ref": self.rule_ref,
        }


@dataclass(frozen=True)
class PathDescriptor:
    """Aggregated root-to-ONT path used by budget calculations."""

    ont_id: str
    segments: tuple[FiberSegment, ...]
    splitters: tuple[SplitterSpec, ...]
    length_km: Decimal
    splice_count: int
    connector_count: int

    @property
    def splitter_ratios(self) -> tuple[int, ...]:
        return tuple(s.output_ports for s in self.splitters)

    @property
    def total_split(self) -> int:
        return math.prod(self.splitter_ratios)

    @classmethod
    def synthetic(
        cls,
        length_km,
        splitter_ratios: Sequence[int] = (),
        connector_count: int = 0,
        splice_count: int = 0,
        ont_id: str = "synthetic",
    ) -> "PathDescriptor":
        """Standalone path for what-if budgeting, detached from any tree."""
        splitters = tuple(
            SplitterSpec(node_id=f"hub-{i + 1}", output_ports=r, level=i + 1)
            for i, r in enumerate(splitter_ratios)
        )
        return cls(
            ont_id=ont_id,
            segments=(),
            splitters=splitters,
            length_km=to_decimal(length_km),
            splice_count=splice_count,
            connector_count=connector_count,
        )


@dataclass(frozen=True)
class PonTree:
    """The passive plant served by one OLT PON port."""

    root_port: str
    nodes: tuple[OdnNode, ...]
    segments: tuple[FiberSegment, ...] = ()
    splitters: tuple[SplitterSpec, ...] = ()
    physical_reach_limit_km: int = 20  # GPON class reach: 10 or 20
    split_cap: int = DEFAULT_SPLIT_CAP

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "splitters", tuple(self.splitters))
        if self.physical_reach_limit_km not in (10, 20):
            raise ValueError("physical_reach_limit_km must be 10 or 20")
        if self.split_cap < 1:
            raise ValueError("split_cap must be positive")

    @cached_property
    def nodes_by_id(self) -> Mapping[str, OdnNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def splitters_by_node(self) -> Mapping[str, SplitterSpec]:
        return {s.node_id: s for s in self.splitters}

    @cached_property
    def root_node(self) -> OdnNode:
        roots = [n for n in self.nodes if n.kind is NodeKind.CENTRAL_OFFICE_OLT]
        if len(roots) != 1:
            raise ValueError(
                f"tree {self.root_port!r} must contain exactly one central office node, "
                f"found {len(roots)}"
            )
        return roots[0]

    def onts(self) -> tuple[OdnNode, ...]:
        return tuple(sorted((n for n in self.nodes if n.kind is NodeKind.ONT), key=lambda n: n.id))

    @cached_property
    def _adjacency(self) -> Mapping[str, list]:
        """Undirected adjacency over non-protection segments with known endpoints."""
        adj: dict[str, list] = {n.id: [] for n in self.nodes}
        for seg in self.segments:
            if seg.protection:
                continue
            if seg.from_node in adj and seg.to_node in adj:
                adj[seg.from_node].append((seg.to_node, seg))
                adj[seg.to_node].append((seg.from_node, seg))
        return adj

    @cached_property
    def _parents(self) -> Mapping[str, tuple]:
        """BFS parent map from the root: node id -> (parent id, segment)."""
        root = self.root_node
        parents: dict[str, tuple] = {root.id: (None, None)}
        queue = [root.id]
        while queue:
            cur = queue.pop(0)
            for nbr, seg in self._adjacency[cur]:
                if nbr not in parents:
                    parents[nbr] = (cur, seg)
                    queue.append(nbr)
        return parents


# ------------------------- path extraction -------------------------


def path_to_ont(tree: PonTree, ont_id: str) -> PathDescriptor:
    """Ordered root-to-ONT walk with aggregated lengths and counts.

    The tree is assumed to validate cleanly; on malformed trees prefer
    validate_topology, which reports problems instead of raising.
    """
    node = tree.nodes_by_id.get(ont_id)
    if node is None or node.kind is not NodeKind.ONT:
        raise UnknownOntError(f"no ONT with id {ont_id!r} in tree {tree.root_port!r}")
    parents = tree._parents
    if ont_id not in parents:
        raise DisconnectedOntError(f"ONT {ont_id!r} has no path to the root")

    chain_nodes: list[str] = []
    chain_segments: list[FiberSegment] = []
    cur = ont_id
    while cur is not None:
        chain_nodes.append(cur)
        parent, seg = parents[cur]
        if seg is not None:
            chain_segments.append(seg)
        cur = parent
    chain_nodes.reverse()
    chain_segments.reverse()

    splitters = tuple(
        tree.splitters_by_node[nid]
        for nid in chain_nodes[:-1]
        if nid in tree.splitters_by_node
    )
    length = Decimal(0)
    splices = 0
    connectors = 0
    for seg in chain_segments:
        eff = seg.effective_length_km
        if eff is None:
            raise ValueError(f"segment {seg.id!r} has neither length_km nor geometry")
        length += eff
        splices += seg.splice_count
        connectors += seg.connector_count
    return PathDescriptor(
        ont_id=ont_id,
        segments=tuple(chain_segments),
        splitters=splitters,
        length_km=length,
        splice_count=splices,
        connector_count=connectors,
    )


def total_split(tree: PonTree, ont_id: str) -> int:
    """Product of splitter output sizes along the root-to-ONT path (1 if none)."""
    return path_to_ont(tree, ont_id).total_split


# ------------------------- topology validation -------------------------


def validate_topology(
    tree: PonTree, *, ladder: Sequence[int] = STANDARD_FIBER_COUNTS
) -> list[Violation]:
    """Check the full tree invariant set and return every breach found.

    Rules checked:
      - ids unique; segment endpoints and splitter hosts must exist
      - exactly one central office node, everything reachable from it
      - no cycles; each ONT has exactly one path to the root
      - splitter levels strictly increase along any path
      - multiplied split per path stays within the tree's split cap
      - cumulative path length stays within the physical reach limit
      - splitters feed at most output_ports next-stage consumers, and a
        bare PON port feeds at most one
      - segments carry enough fibers for the paths routed through them
      - every segment has a usable length (declared or geometric)
      - drop cables are 2-fiber and feeder/distribution sizes come from
        the cable ladder unless flagged nonstandard (warnings)
    """
    out: list[Violation] = []

    node_ids: set[str] = set()
    for n in tree.nodes:
        if n.id in node_ids:
            out.append(Violation.error("DuplicateNodeId", n.id, f"node id {n.id!r} appears more than once"))
        node_ids.add(n.id)

    seg_ids: set[str] = set()
    usable_segments: list[FiberSegment] = []
    for seg in tree.segments:
        if seg.id in seg_ids:
            out.append(Violation.error("DuplicateSegmentId", seg.id, f"segment id {seg.id!r} appears more than once"))
        seg_ids.add(seg.id)
        refs_ok = True
        for ref in (seg.from_node, seg.to_node):
            if ref not in node_ids:
                refs_ok = False
                out.append(
                    Violation.error(
                        "UnknownNodeReference", seg.id,
                        f"segment {seg.id!r} references unknown node {ref!r}",
                    )
                )
        if seg.effective_length_km is None:
            out.append(
                Violation.error(
                    "MissingLength", seg.id,
                    f"segment {seg.id!r} has neither length_km nor geometry",
                )
            )
        if seg.role is SegmentRole.DROP:
            if seg.fiber_count != 2 and not seg.nonstandard_fiber_count:
                out.append(
                    Violation.warning(
                        "DropFiberCount", seg.id,
                        f"drop {seg.id!r} carries {seg.fiber_count} fibers, standard drops carry 2",
                    )
                )
        elif seg.fiber_count not in ladder and not seg.nonstandard_fiber_count:
            out.append(
                Violation.warning(
                    "NonStandardCable", seg.id,
                    f"{seg.role.value} cable {seg.id!r} size {seg.fiber_count}F is not on the ladder {tuple(ladder)}",
                )
            )
        if refs_ok and not seg.protection:
            usable_segments.append(seg)

    splitter_hosts: set[str] = set()
    for spl in tree.splitters:
        if spl.node_id in splitter_hosts:
            out.append(
                Violation.error(
                    "DuplicateSplitter", spl.node_id,
                    f"more than one splitter declared at node {spl.node_id!r}",
                )
            )
        splitter_hosts.add(spl.node_id)
        if spl.node_id not in node_ids:
            out.append(
                Violation.error(
                    "UnknownNodeReference", spl.node_id,
                    f"splitter hosted at unknown node {spl.node_id!r}",
                )
            )

    roots = [n for n in tree.nodes if n.kind is NodeKind.CENTRAL_OFFICE_OLT]
    if not roots:
        out.append(
            Violation.error(
                "MissingRoot", tree.root_port or "tree",
                "tree has no central office node to serve as root",
            )
        )
        return out
    if len(roots) > 1:
        extras = ", ".join(sorted(n.id for n in roots))
        out.append(
            Violation.error(
                "MultipleRoots", roots[0].id,
                f"tree must contain exactly one central office node, found: {extras}",
            )
        )
    root = sorted(roots, key=lambda n: n.id)[0]

    # Undirected BFS from the root; extra edges to visited nodes are cycles.
    adj: dict[str, list] = {nid: [] for nid in node_ids}
    for seg in usable_segments:
        adj[seg.from_node].append((seg.to_node, seg))
        adj[seg.to_node].append((seg.from_node, seg))

    entry_edge: dict[str, Optional[str]] = {root.id: None}
    parents: dict[str, tuple] = {root.id: (None, None)}
    order: list[str] = [root.id]
    queue = [root.id]
    cycle_reported: set[str] = set()
    while queue:
        cur = queue.pop(0)
        for nbr, seg in adj[cur]:
            if seg.id == entry_edge[cur]:
                continue
            if nbr in parents:
                if seg.id not in cycle_reported:
                    cycle_reported.add(seg.id)
                    out.append(
                        Violation.error(
                            "CycleDetected", seg.id,
                            f"segment {seg.id!r} closes a loop between {seg.from_node!r} and {seg.to_node!r}",
                        )
                    )
                continue
            parents[nbr] = (cur, seg)
            entry_edge[nbr] = seg.id
            order.append(nbr)
            queue.append(nbr)

    # Standby (protection) segments count for reachability of structures,
    # but an ONT must sit on the working topology.
    standby_reach: set[str] = set(parents)
    standby_edges = [
        s for s in tree.segments
        if s.protection and s.from_node in node_ids and s.to_node in node_ids
    ]
    grew = True
    while grew:
        grew = False
        for seg in standby_edges:
            for a, b in ((seg.from_node, seg.to_node), (seg.to_node, seg.from_node)):
                if a in standby_reach and b not in standby_reach:
                    standby_reach.add(b)
                    grew = True
    for n in tree.nodes:
        if n.id in parents:
            continue
        if n.kind is NodeKind.ONT:
            out.append(
                Violation.error("DisconnectedOnt", n.id, f"ONT {n.id!r} has no path to the root")
            )
        elif n.id not in standby_reach:
            out.append(
                Violation.error("DisconnectedNode", n.id, f"node {n.id!r} is not connected to the root")
            )

    # Per-ONT path rules over the BFS tree.
    spl_by_node = {s.node_id: s for s in tree.splitters}
    for ont in sorted((n for n in tree.nodes if n.kind is NodeKind.ONT), key=lambda n: n.id):
        if ont.id not in parents:
            continue
        chain: list[str] = []
        length = Decimal(0)
        cur = ont.id
        while cur is not None:
            chain.append(cur)
            parent, seg = parents[cur]
            if seg is not None and seg.effective_length_km is not None:
                length += seg.effective_length_km
            cur = parent
        chain.reverse()
        path_splitters = [spl_by_node[nid] for nid in chain[:-1] if nid in spl_by_node]

        levels = [s.level for s in path_splitters]
        if any(b <= a for a, b in zip(levels, levels[1:])):
            out.append(
                Violation.error(
                    "SplitterLevelOrder", ont.id,
                    f"splitter levels along the path to {ont.id!r} are not strictly increasing: {levels}",
                )
            )
        product = math.prod(s.output_ports for s in path_splitters)
        if product > tree.split_cap:
            out.append(
                Violation.error(
                    "SplitCapExceeded", ont.id,
                    f"multiplied split {product} on the path to {ont.id!r} exceeds the cap of {tree.split_cap}",
                )
            )
        if length > tree.physical_reach_limit_km:
            out.append(
                Violation.error(
                    "ReachExceeded", ont.id,
                    f"path to {ont.id!r} is {length} km, over the {tree.physical_reach_limit_km} km reach limit",
                    rule_ref="physical-reach",
                )
            )

    # Subscription and fiber capacity over the BFS tree. need(v) is the
    # number of upstream fibers node v's subtree consumes: 1 for an ONT or
    # a splitter input, else the sum over children.
    children: dict[str, list[str]] = {nid: [] for nid in parents}
    for nid in order[1:]:
        parent, _ = parents[nid]
        children[parent].append(nid)

    need: dict[str, int] = {}
    for nid in reversed(order):
        node = tree.nodes_by_id.get(nid)
        below = sum(need[c] for c in children[nid])
        if nid in spl_by_node:
            spl = spl_by_node[nid]
            if below > spl.output_ports:
                out.append(
                    Violation.error(
                        "SplitterOversubscribed", nid,
                        f"splitter 1:{spl.output_ports} at {nid!r} feeds {below} next-stage consumers",
                    )
                )
            need[nid] = 1
        elif node is not None and node.kind is NodeKind.ONT:
            if below:
                out.append(
                    Violation.error(
                        "OntNotLeaf", nid, f"ONT {nid!r} has downstream plant attached"
                    )
                )
            need[nid] = 1 + below
        else:
            need[nid] = below
    if root.id not in spl_by_node and need.get(root.id, 0) > 1:
        out.append(
            Violation.error(
                "SplitterOversubscribed", root.id,
                f"PON port feeds {need[root.id]} consumers with no splitter at {root.id!r}",
            )
        )
    for nid in order[1:]:
        _, seg = parents[nid]
        if need[nid] > seg.fiber_count:
            out.append(
                Violation.error(
                    "FiberCountExceeded", seg.id,
                    f"segment {seg.id!r} carries {need[nid]} lit fibers but is only {seg.fiber_count}F",
                )
            )

    return out
