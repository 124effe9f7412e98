"""Capacity math and bill-of-materials aggregation.

Cable sizing applies a 25 percent spare-fiber margin and snaps to the
standard cable ladder; splitter and PON port counts are straight ceiling
divisions. The Bom rolls a whole plan up into purchasable quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .budget import BudgetStatus, BudgetThresholds, DEFAULT_THRESHOLDS, LossModel, budget_tree
from .errors import InvalidPlanError
from .geodata import PlanDocument, validate_plan
from .model import NodeKind, SPLITTER_OUTPUT_SIZES, STANDARD_FIBER_COUNTS, to_decimal

# Spare-fiber margin applied to every cable demand before ladder rounding.
CABLE_MARGIN = Decimal("1.25")

_KM_QUANTUM = Decimal("0.001")

_CABINET_KINDS = (NodeKind.FDH, NodeKind.FAT, NodeKind.MICRO_ODF)
_STRUCTURE_KINDS = (NodeKind.JOINT_BOX, NodeKind.MANHOLE, NodeKind.HANDHOLE)
_ROLE_ORDER = ("feeder", "distribution", "drop")


@dataclass(frozen=True)
class CableLadder:
    """Stocked cable sizes in ascending fiber counts."""

    sizes: tuple[int, ...] = STANDARD_FIBER_COUNTS

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("cable ladder sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("cable ladder sizes must strictly increase")
        object.__setattr__(self, "sizes", sizes)


DEFAULT_LADDER = CableLadder()


@dataclass(frozen=True)
class OltCapacity:
    """Chassis layout of one OLT: sub-racks of 16 GPON cards."""

    sub_racks: int = 2
    cards_per_rack: int = 16
    ports_per_card: int = 8

    def __post_init__(self):
        if self.sub_racks not in (2, 3):
            raise ValueError("sub_racks must be 2 or 3")
        if self.cards_per_rack != 16:
            raise ValueError("cards_per_rack is fixed at 16")
        if self.ports_per_card not in (4, 8):
            raise ValueError("ports_per_card must be 4 or 8")


def splitter_count(tenants: int, split_ratio: int) -> int:
    """Minimum number of 1:split_ratio splitters covering the tenant count."""
    if tenants < 1:
        raise ValueError("tenants must be >= 1")
    if split_ratio not in SPLITTER_OUTPUT_SIZES:
        raise ValueError(f"split_ratio must be one of {SPLITTER_OUTPUT_SIZES}")
    return -(-tenants // split_ratio)


def cable_size(demand_fibers: int, ladder: CableLadder = DEFAULT_LADDER):
    """Ladder size closest to demand plus 25 percent margin, never below demand.

    A demand that cannot fit the largest stocked cable becomes a list:
    largest sizes are peeled off greedily and the remainder is sized by
    the single-cable rule.
    """
    if demand_fibers < 1:
        raise ValueError("demand_fibers must be >= 1")
    sizes = ladder.sizes
    target = to_decimal(demand_fibers) * CABLE_MARGIN
    remaining_demand = demand_fibers
    parts: list[int] = []
    if demand_fibers > sizes[-1]:
        while target > sizes[-1]:
            parts.append(sizes[-1])
            target -= sizes[-1]
            remaining_demand -= sizes[-1]
    # Nearest ladder size to the margined remainder; ties round up.
    best = min(sizes, key=lambda s: (abs(s - target), -s))
    if best < remaining_demand:
        best = next(s for s in sizes if s >= remaining_demand)
    if parts:
        parts.append(best)
        return parts
    return best


def bandwidth_per_tenant(downstream_rate_mbps, total_split: int) -> Decimal:
    """Downstream share per tenant behind the multiplied split."""
    if total_split < 1:
        raise ValueError("total_split must be >= 1")
    return to_decimal(downstream_rate_mbps) / total_split


def pon_ports_required(tenants: int, split_ratio: int) -> int:
    """PON ports needed when each port feeds one first-level splitter."""
    return splitter_count(tenants, split_ratio)


def olt_total_ports(capacity: OltCapacity) -> int:
    return capacity.sub_racks * capacity.cards_per_rack * capacity.ports_per_card


# ------------------------- bill of materials -------------------------


@dataclass(frozen=True)
class Bom:
    """Plan-wide quantities. Cable lengths are km at 3 decimals."""

    splitters: dict = field(default_factory=dict)  # (input, output) -> count
    cables_km: dict = field(default_factory=dict)  # (fiber_count, role) -> Decimal km
    cabinets: dict = field(default_factory=dict)  # kind value -> count
    structures: dict = field(default_factory=dict)  # kind value -> count
    connectors: int = 0
    splices: int = 0
    attenuators: int = 0
    pon_ports: int = 0

    def __add__(self, other: "Bom") -> "Bom":
        def merge(a: dict, b: dict) -> dict:
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0) + v
            return out

        return Bom(
            splitters=merge(self.splitters, other.splitters),
            cables_km=merge(self.cables_km, other.cables_km),
            cabinets=merge(self.cabinets, other.cabinets),
            structures=merge(self.structures, other.structures),
            connectors=self.connectors + other.connectors,
            splices=self.splices + other.splices,
            attenuators=self.attenuators + other.attenuators,
            pon_ports=self.pon_ports + other.pon_ports,
        )

    def to_rows(self) -> list[tuple[str, str, object]]:
        """Stable (item, unit, quantity) rows for reports."""
        rows: list[tuple[str, str, object]] = []
        for (inputs, outputs), count in sorted(self.splitters.items()):
            rows.append((f"splitter_{inputs}x{outputs}", "count", count))
        def role_key(entry):
            (size, role), _ = entry
            return (_ROLE_ORDER.index(role), size)
        for (size, role), km in sorted(self.cables_km.items(), key=role_key):
            rows.append((f"cable_{role}_{size}f", "km", km.quantize(_KM_QUANTUM)))
        for kind in _CABINET_KINDS:
            count = self.cabinets.get(kind.value, 0)
            if count:
                rows.append((f"cabinet_{kind.value}", "count", count))
        for kind in _STRUCTURE_KINDS:
            count = self.structures.get(kind.value, 0)
            if count:
                rows.append((f"structure_{kind.value}", "count", count))
        rows.append(("connectors", "count", self.connectors))
        rows.append(("splices", "count", self.splices))
        rows.append(("attenuators", "count", self.attenuators))
        rows.append(("pon_ports", "count", self.pon_ports))
        return rows

    def to_flat_dict(self) -> dict:
        return {item: qty for item, _, qty in self.to_rows()}


def bom(
    plan: PlanDocument,
    model: Optional[LossModel] = None,
    thresholds: BudgetThresholds = DEFAULT_THRESHOLDS,
) -> Bom:
    """Aggregate a validated plan into purchasable quantities.

    Counts every drawn feature, standby protection routes included.
    Attenuators are only counted when a loss model is supplied to budget
    the ONTs with. Raises InvalidPlanError when validation finds errors.
    """
    errors = [v for v in validate_plan(plan) if v.severity == "error"]
    if errors:
        raise InvalidPlanError(
            f"plan fails topology validation with {len(errors)} error(s)", errors
        )

    splitters: dict[tuple[int, int], int] = {}
    for spl in plan.splitters:
        key = (spl.input_ports, spl.output_ports)
        splitters[key] = splitters.get(key, 0) + 1

    cables: dict[tuple[int, str], Decimal] = {}
    connectors = 0
    splices = 0
    for seg in plan.segments:
        key = (seg.fiber_count, seg.role.value)
        length = seg.effective_length_km or Decimal(0)
        cables[key] = cables.get(key, Decimal(0)) + length
        connectors += seg.connector_count
        splices += seg.splice_count

    cabinets: dict[str, int] = {}
    structures: dict[str, int] = {}
    for node in plan.nodes:
        if node.kind in _CABINET_KINDS:
            cabinets[node.kind.value] = cabinets.get(node.kind.value, 0) + 1
        elif node.kind in _STRUCTURE_KINDS:
            structures[node.kind.value] = structures.get(node.kind.value, 0) + 1

    attenuators = 0
    if model is not None:
        for tree in plan.trees:
            for entry in budget_tree(tree, model, thresholds):
                if entry.status is BudgetStatus.NEEDS_ATTENUATOR:
                    attenuators += 1

    pon_ports = 0
    for tree in plan.trees:
        root_id = tree.root_node.id
        standby = sum(
            1 for seg in tree.segments if seg.protection and root_id in (seg.from_node, seg.to_node)
        )
        pon_ports += 1 + standby

    return Bom(
        splitters=splitters,
        cables_km={k: v.quantize(_KM_QUANTUM) for k, v in cables.items()},
        cabinets=cabinets,
        structures=structures,
        connectors=connectors,
        splices=splices,
        attenuators=attenuators,
        pon_ports=pon_ports,
    )
