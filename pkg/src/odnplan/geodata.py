"""GeoJSON plan bundles, georeferencing, and geodesic helpers.

A plan bundle is a set of GeoJSON FeatureCollections, one per layer,
tied together by an optional manifest.json. Features link into the ODN
graph through an "odn" object in their properties; the schema is
documented in the project README. Emission is canonical (features sorted
by id, coordinates at 7 decimals, keys sorted) so identical plans always
serialize to identical bytes.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import warnings
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .budget import BudgetThresholds, DEFAULT_THRESHOLDS, LossModel, budget_tree
from .errors import (
    ControlPointCountWarning,
    DanglingReferenceError,
    DegenerateControlPointsError,
    GeometryTypeMismatchError,
    SchemaError,
    TooFewPointsError,
)
from .geomath import Coordinate, polyline_length_km
from .model import (
    FiberSegment,
    NodeKind,
    OdnNode,
    PonTree,
    SegmentRole,
    SplitterSpec,
    Violation,
    validate_topology,
)

# Every plan document carries these layers, empty or not; unknown layer
# names ride along untouched.
REQUIRED_LAYERS = (
    "parcels",
    "roads",
    "zones",
    "water",
    "ducts",
    "structures",
    "equipment",
    "feeder_cables",
    "distribution_cables",
    "drop_cables",
    "olt_boundaries",
    "service_areas",
)

_NODE_LAYERS = ("structures", "equipment")
_CABLE_LAYERS = {
    "feeder_cables": SegmentRole.FEEDER,
    "distribution_cables": SegmentRole.DISTRIBUTION,
    "drop_cables": SegmentRole.DROP,
}
_EQUIPMENT_KINDS = {
    NodeKind.CENTRAL_OFFICE_OLT,
    NodeKind.FDH,
    NodeKind.FAT,
    NodeKind.MICRO_ODF,
    NodeKind.ONT,
}

COORD_DECIMALS = 7


# ------------------------- georeferencing -------------------------


@dataclass(frozen=True)
class ControlPoint:
    """Pairing of a drawing coordinate with its real-world lon/lat."""

    source: tuple[float, float]
    target: tuple[float, float]

    def __post_init__(self):
        sx, sy = self.source
        tx, ty = self.target
        for v in (sx, sy, tx, ty):
            if not math.isfinite(float(v)):
                raise ValueError("control point coordinates must be finite")
        object.__setattr__(self, "source", (float(sx), float(sy)))
        object.__setattr__(self, "target", (float(tx), float(ty)))


@dataclass(frozen=True)
class AffineTransform:
    """Six-parameter planar transform (x, y) -> (a x + b y + tx, c x + d y + ty)."""

    a: float
    b: float
    c: float
    d: float
    tx: float
    ty: float

    def __post_init__(self):
        if self.determinant == 0.0:
            raise ValueError("affine transform must be invertible (determinant != 0)")

    @property
    def determinant(self) -> float:
        return self.a * self.d - self.b * self.c

    def apply(self, point: Sequence[float]) -> tuple[float, float]:
        x, y = float(point[0]), float(point[1])
        return (self.a * x + self.b * y + self.tx, self.c * x + self.d * y + self.ty)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "tx": self.tx,
            "ty": self.ty,
        }


def fit_affine(points: Sequence[ControlPoint]) -> tuple[AffineTransform, float]:
    """Least-squares affine fit from control point pairs.

    Returns the transform and the root-mean-square residual in target
    units. Requires at least three non-collinear sources; three points
    give an exact fit, four or more are recommended and fewer than four
    emits a ControlPointCountWarning.
    """
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateControlPointsError(
            f"affine georeferencing needs at least 3 control points, got {len(pts)}"
        )
    if len(pts) == 3:
        # Exact-arithmetic collinearity test; matrix_rank's SVD tolerance
        # is too forgiving for a square system.
        (x1, y1), (x2, y2), (x3, y3) = (
            (Fraction(p.source[0]), Fraction(p.source[1])) for p in pts
        )
        if (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1) == 0:
            raise DegenerateControlPointsError(
                "control point sources are collinear or duplicated"
            )
    design = np.array([[p.source[0], p.source[1], 1.0] for p in pts], dtype=float)
    if np.linalg.matrix_rank(design) < 3:
        raise DegenerateControlPointsError(
            "control point sources are collinear or duplicated"
        )
    target_x = np.array([p.target[0] for p in pts], dtype=float)
    target_y = np.array([p.target[1] for p in pts], dtype=float)
    coef_x, _, _, _ = np.linalg.lstsq(design, target_x, rcond=None)
    coef_y, _, _, _ = np.linalg.lstsq(design, target_y, rcond=None)
    try:
        transform = AffineTransform(
            a=float(coef_x[0]),
            b=float(coef_x[1]),
            tx=float(coef_x[2]),
            c=float(coef_y[0]),
            d=float(coef_y[1]),
            ty=float(coef_y[2]),
        )
    except ValueError:
        raise DegenerateControlPointsError(
            "control point targets collapse to a singular transform"
        ) from None
    if len(pts) == 3:
        # A nonsingular square system interpolates its data; the optimum
        # has zero residual by construction.
        rms = 0.0
    else:
        dx = design @ coef_x - target_x
        dy = design @ coef_y - target_y
        rms = float(np.sqrt(np.mean(dx * dx + dy * dy)))
    if len(pts) < 4:
        warnings.warn(
            f"{len(pts)} control points used; 4 or more are recommended",
            ControlPointCountWarning,
            stacklevel=2,
        )
    return transform, rms


def apply_affine(
    transform: AffineTransform, points: Sequence[Sequence[float]]
) -> tuple[tuple[float, float], ...]:
    """Map a sequence of source coordinates through the transform."""
    return tuple(transform.apply(p) for p in points)


def read_control_points(path) -> list[ControlPoint]:
    """Load control points from a JSON list or a CSV of x,y,lon,lat rows."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        out = []
        with p.open(newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row:
                    continue
                try:
                    x, y, lon, lat = (float(v) for v in row[:4])
                except ValueError:
                    if i == 0:
                        continue  # header row
                    raise ValueError(f"{path}: row {i + 1} is not numeric: {row!r}") from None
                out.append(ControlPoint(source=(x, y), target=(lon, lat)))
        return out
    data = json.loads(p.read_text())
    if isinstance(data, dict):
        data = data.get("points", [])
    out = []
    for entry in data:
        if isinstance(entry, dict):
            out.append(ControlPoint(source=tuple(entry["source"]), target=tuple(entry["target"])))
        else:
            x, y, lon, lat = entry
            out.append(ControlPoint(source=(x, y), target=(lon, lat)))
    return out


def geodesic_length_km(polyline: Sequence[Coordinate]) -> float:
    """Haversine length of a lon/lat polyline in km."""
    if len(polyline) < 2:
        raise TooFewPointsError("a polyline needs at least two points")
    return polyline_length_km(polyline)


# ------------------------- plan document -------------------------


@dataclass(frozen=True)
class PlanMetadata:
    projection: str = "EPSG:4326"
    version: str = "1"
    author: str = ""

    def to_dict(self) -> dict:
        return {"projection": self.projection, "version": self.version, "author": self.author}


@dataclass(frozen=True, eq=True)
class PlanDocument:
    """A full plan: canonical GeoJSON layers plus the assembled ODN graph."""

    layers: dict
    metadata: PlanMetadata
    trees: tuple[PonTree, ...]
    nodes: tuple[OdnNode, ...]
    segments: tuple[FiberSegment, ...]
    splitters: tuple[SplitterSpec, ...] = ()

    def layer(self, name: str) -> dict:
        return self.layers.get(name, {"type": "FeatureCollection", "features": []})


def _round_coords(value):
    if isinstance(value, (list, tuple)):
        return [_round_coords(v) for v in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return round(float(value), COORD_DECIMALS)
    return value


def _canonical_feature(feature: dict) -> dict:
    out = copy.deepcopy(feature)
    geom = out.get("geometry")
    if isinstance(geom, dict) and "coordinates" in geom:
        geom["coordinates"] = _round_coords(geom["coordinates"])
    return out


def _feature_sort_key(feature: dict):
    props = feature.get("properties") or {}
    odn = props.get("odn") or {}
    fid = odn.get("id", feature.get("id"))
    if fid is not None:
        return (0, str(fid), "")
    return (1, "", json.dumps(feature, sort_keys=True, default=str))


def _feature_odn(feature: dict) -> dict:
    props = feature.get("properties") or {}
    odn = props.get("odn")
    return odn if isinstance(odn, dict) else {}


def _geometry(feature: dict) -> dict:
    geom = feature.get("geometry")
    return geom if isinstance(geom, dict) else {}


# ------------------------- assembly -------------------------


class _Diagnostics:
    """Ordered load problems; the first category encountered picks the error."""

    _CLASSES = {
        "schema": SchemaError,
        "geometry": GeometryTypeMismatchError,
        "dangling": DanglingReferenceError,
    }

    def __init__(self):
        self.entries: list[tuple[str, str]] = []

    def add(self, category: str, message: str):
        self.entries.append((category, message))

    def raise_if_any(self):
        if not self.entries:
            return
        first_category = self.entries[0][0]
        messages = [m for _, m in self.entries]
        exc = self._CLASSES[first_category]
        raise exc("; ".join(messages), diagnostics=messages)


def _parse_nodes(layers: Mapping[str, dict], diags: _Diagnostics):
    nodes: dict[str, OdnNode] = {}
    splitters: dict[str, SplitterSpec] = {}
    olt_props: dict[str, dict] = {}
    for layer_name in _NODE_LAYERS:
        fc = layers.get(layer_name) or {}
        for feature in fc.get("features", []):
            odn = _feature_odn(feature)
            if not odn:
                continue
            fid = odn.get("id")
            if not fid:
                diags.add("schema", f"{layer_name}: feature without odn.id")
                continue
            geom = _geometry(feature)
            if geom.get("type") != "Point":
                diags.add(
                    "geometry",
                    f"{layer_name}: node {fid!r} needs Point geometry, got {geom.get('type')!r}",
                )
                continue
            kind_raw = odn.get("kind", "")
            try:
                kind = NodeKind(kind_raw)
            except ValueError:
                diags.add("schema", f"{layer_name}: node {fid!r} has unknown kind {kind_raw!r}")
                continue
            if fid in nodes:
                diags.add("schema", f"duplicate node id {fid!r}")
                continue
            coords = geom.get("coordinates") or []
            try:
                node = OdnNode(
                    id=str(fid),
                    kind=kind,
                    position=(float(coords[0]), float(coords[1])),
                    label=odn.get("label"),
                    terminal=odn.get("terminal"),
                )
            except (ValueError, IndexError, TypeError) as exc:
                diags.add("schema", f"{layer_name}: node {fid!r}: {exc}")
                continue
            nodes[node.id] = node
            spl = odn.get("splitter")
            if isinstance(spl, dict):
                try:
                    splitters[node.id] = SplitterSpec(
                        node_id=node.id,
                        output_ports=int(spl["output_ports"]),
                        level=int(spl.get("level", 1)),
                        input_ports=int(spl.get("input_ports", 1)),
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    diags.add("schema", f"{layer_name}: splitter at {fid!r}: {exc}")
            if kind is NodeKind.CENTRAL_OFFICE_OLT:
                olt_props[node.id] = odn
    return nodes, splitters, olt_props


def _parse_segments(layers: Mapping[str, dict], nodes: Mapping[str, OdnNode], diags: _Diagnostics):
    segments: dict[str, FiberSegment] = {}
    for layer_name, role in _CABLE_LAYERS.items():
        fc = layers.get(layer_name) or {}
        for feature in fc.get("features", []):
            odn = _feature_odn(feature)
            if not odn:
                continue
            fid = odn.get("id")
            if not fid:
                diags.add("schema", f"{layer_name}: feature without odn.id")
                continue
            geom = _geometry(feature)
            geometry = None
            if geom:
                if geom.get("type") != "LineString":
                    diags.add(
                        "geometry",
                        f"{layer_name}: cable {fid!r} needs LineString geometry, got {geom.get('type')!r}",
                    )
                    continue
                geometry = tuple((float(c[0]), float(c[1])) for c in geom.get("coordinates", []))
            src, dst = odn.get("from"), odn.get("to")
            if src is None or dst is None:
                diags.add("schema", f"{layer_name}: cable {fid!r} is missing from/to")
                continue
            missing = [ref for ref in (src, dst) if ref not in nodes]
            if missing:
                diags.add(
                    "dangling",
                    f"{layer_name}: cable {fid!r} references unknown node(s) {missing}",
                )
                continue
            if fid in segments or fid in nodes:
                diags.add("schema", f"duplicate id {fid!r}")
                continue
            try:
                segments[fid] = FiberSegment(
                    id=str(fid),
                    from_node=str(src),
                    to_node=str(dst),
                    role=role,
                    fiber_count=int(odn.get("fiber_count", 0)),
                    length_km=odn.get("length_km"),
                    geometry=geometry,
                    splice_count=int(odn.get("splices", 0)),
                    connector_count=int(odn.get("connectors", 0)),
                    nonstandard_fiber_count=bool(odn.get("nonstandard_fiber_count", False)),
                    protection=bool(odn.get("protection", False)),
                )
            except (ValueError, TypeError) as exc:
                diags.add("schema", f"{layer_name}: cable {fid!r}: {exc}")
    return segments


def _components(nodes: Mapping[str, OdnNode], segments: Mapping[str, FiberSegment]):
    """Connected components over the segment graph, as sorted node id lists."""
    parent = {nid: nid for nid in nodes}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for seg in segments.values():
        union(seg.from_node, seg.to_node)
    groups: dict[str, list[str]] = {}
    for nid in sorted(nodes):
        groups.setdefault(find(nid), []).append(nid)
    connected = {nid for seg in segments.values() for nid in (seg.from_node, seg.to_node)}
    return [ids for ids in groups.values() if len(ids) > 1 or ids[0] in connected]


def assemble_plan(layers: Mapping[str, dict], metadata: Optional[PlanMetadata] = None) -> PlanDocument:
    """Build a PlanDocument from raw layer FeatureCollections.

    Layers are canonicalized (features sorted by id, coordinates rounded)
    so an assembled document always emits byte-identical output. Raises a
    bundle error carrying all diagnostics when features do not match the
    schema or reference unknown nodes.
    """
    diags = _Diagnostics()
    canonical: dict[str, dict] = {}
    names = list(REQUIRED_LAYERS) + sorted(set(layers) - set(REQUIRED_LAYERS))
    for name in names:
        fc = layers.get(name)
        if fc is None:
            canonical[name] = {"type": "FeatureCollection", "features": []}
            continue
        if not isinstance(fc, dict) or fc.get("type") != "FeatureCollection":
            diags.add("schema", f"layer {name!r} is not a GeoJSON FeatureCollection")
            continue
        features = fc.get("features", [])
        if not isinstance(features, list):
            diags.add("schema", f"layer {name!r} has a non-list features member")
            continue
        cleaned = sorted((_canonical_feature(f) for f in features), key=_feature_sort_key)
        out = {k: copy.deepcopy(v) for k, v in fc.items() if k not in ("type", "features")}
        out["type"] = "FeatureCollection"
        out["features"] = cleaned
        canonical[name] = out
    diags.raise_if_any()

    nodes, splitters, olt_props = _parse_nodes(canonical, diags)
    segments = _parse_segments(canonical, nodes, diags)
    diags.raise_if_any()

    trees = []
    for comp in _components(nodes, segments):
        comp_set = set(comp)
        comp_nodes = tuple(nodes[nid] for nid in comp)
        comp_segments = tuple(
            seg for sid, seg in sorted(segments.items()) if seg.from_node in comp_set
        )
        comp_splitters = tuple(
            splitters[nid] for nid in comp if nid in splitters
        )
        olts = [nid for nid in comp if nodes[nid].kind is NodeKind.CENTRAL_OFFICE_OLT]
        if olts:
            props = olt_props.get(olts[0], {})
            root_port = str(props.get("root_port") or f"{olts[0]}/1/1")
            reach = int(props.get("reach_limit_km", 20))
            cap = int(props.get("split_cap", 64))
        else:
            root_port = f"unrooted:{comp[0]}"
            reach, cap = 20, 64
        trees.append(
            PonTree(
                root_port=root_port,
                nodes=comp_nodes,
                segments=comp_segments,
                splitters=comp_splitters,
                physical_reach_limit_km=reach,
                split_cap=cap,
            )
        )
    trees.sort(key=lambda t: (t.root_port, t.nodes[0].id if t.nodes else ""))

    return PlanDocument(
        layers=canonical,
        metadata=metadata or PlanMetadata(),
        trees=tuple(trees),
        nodes=tuple(nodes[nid] for nid in sorted(nodes)),
        segments=tuple(seg for _, seg in sorted(segments.items())),
        splitters=tuple(splitters[nid] for nid in sorted(splitters)),
    )


# ------------------------- bundle io -------------------------


def load_plan(path) -> PlanDocument:
    """Read a plan bundle from a manifest file or a bundle directory."""
    p = Path(path)
    metadata = PlanMetadata()
    layer_files: dict[str, Path] = {}
    if p.is_dir():
        manifest = p / "manifest.json"
        if manifest.exists():
            return load_plan(manifest)
        for f in sorted(p.glob("*.geojson")):
            layer_files[f.stem] = f
    else:
        data = json.loads(p.read_text())
        if not isinstance(data, dict) or "layers" not in data:
            raise SchemaError(f"manifest {p} must be an object with a 'layers' map")
        meta = data.get("metadata") or {}
        metadata = PlanMetadata(
            projection=str(meta.get("projection", "EPSG:4326")),
            version=str(meta.get("version", "1")),
            author=str(meta.get("author", "")),
        )
        for name, rel in data["layers"].items():
            layer_files[str(name)] = p.parent / rel
    layers = {}
    for name, file in sorted(layer_files.items()):
        parsed = json.loads(file.read_text())
        layers[name] = parsed
    return assemble_plan(layers, metadata)


def emit_plan(plan: PlanDocument) -> dict[str, dict]:
    """Canonical layer dictionaries, ready for byte-stable serialization."""
    return {name: copy.deepcopy(fc) for name, fc in sorted(plan.layers.items())}


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_scalar) + "\n"


def _json_scalar(value):
    if isinstance(value, Decimal):
        return float(value)
    raise TypeError(f"not JSON serializable: {type(value)!r}")


def save_bundle(plan: PlanDocument, directory) -> Path:
    """Write manifest.json plus one .geojson file per layer; returns the manifest path."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    layers = emit_plan(plan)
    manifest = {
        "layers": {name: f"{name}.geojson" for name in sorted(layers)},
        "metadata": plan.metadata.to_dict(),
    }
    for name, fc in layers.items():
        (out_dir / f"{name}.geojson").write_text(_dump_json(fc))
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(_dump_json(manifest))
    return manifest_path


# ------------------------- graph to features -------------------------


def _position_list(position: Coordinate) -> list[float]:
    return [round(position[0], COORD_DECIMALS), round(position[1], COORD_DECIMALS)]


def _node_feature(node: OdnNode, splitter: Optional[SplitterSpec], extra: Optional[dict] = None) -> dict:
    odn: dict = {"id": node.id, "kind": node.kind.value}
    if node.label:
        odn["label"] = node.label
    if node.terminal:
        odn["terminal"] = node.terminal
    if splitter is not None:
        odn["splitter"] = {
            "output_ports": splitter.output_ports,
            "level": splitter.level,
            "input_ports": splitter.input_ports,
        }
    if extra:
        odn.update(extra)
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": _position_list(node.position)},
        "properties": {"odn": odn},
    }


def _segment_feature(seg: FiberSegment, nodes_by_id: Mapping[str, OdnNode]) -> dict:
    if seg.geometry is not None:
        coords = [[round(x, COORD_DECIMALS), round(y, COORD_DECIMALS)] for x, y in seg.geometry]
    else:
        coords = [
            _position_list(nodes_by_id[seg.from_node].position),
            _position_list(nodes_by_id[seg.to_node].position),
        ]
    odn: dict = {
        "id": seg.id,
        "from": seg.from_node,
        "to": seg.to_node,
        "fiber_count": seg.fiber_count,
    }
    if seg.length_km is not None:
        odn["length_km"] = float(seg.length_km)
    if seg.splice_count:
        odn["splices"] = seg.splice_count
    if seg.connector_count:
        odn["connectors"] = seg.connector_count
    if seg.nonstandard_fiber_count:
        odn["nonstandard_fiber_count"] = True
    if seg.protection:
        odn["protection"] = True
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"odn": odn},
    }


def plan_from_trees(
    trees: Sequence[PonTree], metadata: Optional[PlanMetadata] = None,
    extra_layers: Optional[Mapping[str, dict]] = None,
) -> PlanDocument:
    """Serialize trees into bundle layers and assemble the document."""
    layer_features: dict[str, list] = {name: [] for name in REQUIRED_LAYERS}
    for tree in trees:
        spl_by_node = tree.splitters_by_node
        for node in tree.nodes:
            extra = None
            if node.kind is NodeKind.CENTRAL_OFFICE_OLT:
                extra = {
                    "root_port": tree.root_port,
                    "reach_limit_km": tree.physical_reach_limit_km,
                    "split_cap": tree.split_cap,
                }
            feature = _node_feature(node, spl_by_node.get(node.id), extra)
            layer = "equipment" if node.kind in _EQUIPMENT_KINDS else "structures"
            layer_features[layer].append(feature)
        nodes_by_id = tree.nodes_by_id
        for seg in tree.segments:
            layer = {
                SegmentRole.FEEDER: "feeder_cables",
                SegmentRole.DISTRIBUTION: "distribution_cables",
                SegmentRole.DROP: "drop_cables",
            }[seg.role]
            layer_features[layer].append(_segment_feature(seg, nodes_by_id))
    layers = {
        name: {"type": "FeatureCollection", "features": feats}
        for name, feats in layer_features.items()
    }
    if extra_layers:
        layers.update(copy.deepcopy(dict(extra_layers)))
    return assemble_plan(layers, metadata)


# ------------------------- plan-level validation -------------------------


def validate_plan(plan: PlanDocument) -> list[Violation]:
    """Topology validation over every tree, plus document-level checks."""
    out: list[Violation] = []
    in_tree: set[str] = set()
    for tree in plan.trees:
        out.extend(validate_topology(tree))
        in_tree.update(n.id for n in tree.nodes)
    for node in plan.nodes:
        if node.kind is NodeKind.ONT and node.id not in in_tree:
            out.append(
                Violation.error(
                    "DisconnectedOnt", node.id, f"ONT {node.id!r} is not cabled into any tree"
                )
            )
    return out


# ------------------------- budget annotation -------------------------


def attach_budget(
    plan: PlanDocument,
    model: LossModel,
    thresholds: BudgetThresholds = DEFAULT_THRESHOLDS,
) -> PlanDocument:
    """Return a copy of the plan whose ONT features carry budget results."""
    results = {}
    for tree in plan.trees:
        for entry in budget_tree(tree, model, thresholds):
            results[entry.ont_id] = entry
    layers = emit_plan(plan)
    equipment = layers.get("equipment", {"type": "FeatureCollection", "features": []})
    for feature in equipment.get("features", []):
        odn = _feature_odn(feature)
        entry = results.get(odn.get("id"))
        if entry is None:
            continue
        budget_block = {
            "total_db": float(entry.breakdown.total_db),
            "classification": entry.status.value,
        }
        if entry.attenuator_db is not None:
            budget_block["attenuator_db"] = float(entry.attenuator_db)
        if entry.assumptions:
            budget_block["assumptions"] = list(entry.assumptions)
        odn["budget"] = budget_block
    return assemble_plan(layers, plan.metadata)
