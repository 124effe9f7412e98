"""Optical power budget arithmetic for GPON links.

Total loss along a path is the sum of transmission, connector, splitter,
and splice losses plus a single engineering margin:

    total = length * TL + connectors * CL + sum(SL) + splices * SPL + EM

Coefficients are carried as exact decimals so tabulated values survive
arithmetic unchanged; classification against the class B+ window (13 to
28 dB for GPON per ITU-T G.984.2) is therefore exact at the boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import (
    EmptyTreeError,
    NoFeasibleReachError,
    NotApplicableError,
    UnknownSplitterRatioError,
)
from .model import (
    PathDescriptor,
    PonTree,
    SPLITTER_OUTPUT_SIZES,
    path_to_ont,
    to_decimal,
)

# Reach results are floored at picometre resolution so the budget at the
# reported reach never crosses the ceiling by a rounding hair.
_REACH_QUANTUM = Decimal("1e-12")

ASSUMPTION_TWO_INPUT_SPLITTER = (
    "2:N splitters are assessed at the 1:N insertion loss coefficient"
)


class BudgetStatus(Enum):
    NEEDS_ATTENUATOR = "needs_attenuator"
    IN_SERVICE = "in_service"
    OUT_OF_BUDGET = "out_of_budget"


@dataclass(frozen=True)
class LossModel:
    """Per-component loss coefficients, all in dB (dB/km for transmission)."""

    name: str
    transmission_loss_db_per_km: Decimal
    connector_loss_db: Decimal
    splice_loss_db: Decimal
    splitter_loss_db: Mapping[int, Decimal]  # output_ports -> insertion loss
    engineering_margin_db: Decimal

    def __post_init__(self):
        for attr in (
            "transmission_loss_db_per_km",
            "connector_loss_db",
            "splice_loss_db",
            "engineering_margin_db",
        ):
            value = to_decimal(getattr(self, attr))
            if value < 0:
                raise ValueError(f"loss model {self.name!r}: {attr} must be >= 0")
            object.__setattr__(self, attr, value)
        table = {int(k): to_decimal(v) for k, v in self.splitter_loss_db.items()}
        for ratio, loss in table.items():
            if ratio not in SPLITTER_OUTPUT_SIZES:
                raise ValueError(
                    f"loss model {self.name!r}: unknown splitter size 1:{ratio}"
                )
            if loss < 0:
                raise ValueError(f"loss model {self.name!r}: splitter loss must be >= 0")
        ordered = sorted(table)
        losses = [table[r] for r in ordered]
        if any(b <= a for a, b in zip(losses, losses[1:])):
            raise ValueError(
                f"loss model {self.name!r}: splitter loss must strictly increase with size"
            )
        object.__setattr__(self, "splitter_loss_db", dict(sorted(table.items())))

    def splitter_loss(self, output_ports: int) -> Decimal:
        try:
            return self.splitter_loss_db[output_ports]
        except KeyError:
            raise UnknownSplitterRatioError(
                f"loss model {self.name!r} defines no coefficient for a 1:{output_ports} splitter"
            ) from None


@dataclass(frozen=True)
class BudgetThresholds:
    """Acceptance window for total loss, bounds inclusive."""

    min_db: Decimal = Decimal("13")
    max_db: Decimal = Decimal("28")

    def __post_init__(self):
        object.__setattr__(self, "min_db", to_decimal(self.min_db))
        object.__setattr__(self, "max_db", to_decimal(self.max_db))
        if not (0 <= self.min_db < self.max_db):
            raise ValueError("thresholds require 0 <= min_db < max_db")


DEFAULT_THRESHOLDS = BudgetThresholds()

# Vendor-sheet coefficients: "theoretical" is the data-sheet worst case,
# "practical" reflects field-measured splice and splitter performance.
PRESETS: dict[str, LossModel] = {
    "theoretical": LossModel(
        name="theoretical",
        transmission_loss_db_per_km=Decimal("0.35"),
        connector_loss_db=Decimal("0.2"),
        splice_loss_db=Decimal("0.1"),
        splitter_loss_db={
            2: Decimal("3.5"),
            4: Decimal("7.2"),
            8: Decimal("10.5"),
            16: Decimal("13.5"),
            32: Decimal("17"),
            64: Decimal("19.7"),
        },
        engineering_margin_db=Decimal("3"),
    ),
    "practical": LossModel(
        name="practical",
        transmission_loss_db_per_km=Decimal("0.36"),
        connector_loss_db=Decimal("0.21"),
        splice_loss_db=Decimal("0.05"),
        splitter_loss_db={
            2: Decimal("3.48"),
            4: Decimal("7.15"),
            8: Decimal("10.69"),
            16: Decimal("13.72"),
            32: Decimal("17.13"),
            64: Decimal("19.8"),
        },
        engineering_margin_db=Decimal("3"),
    ),
}


def preset(name: str) -> LossModel:
    """Look up a built-in loss model by name."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown loss model preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def load_loss_model(path) -> LossModel:
    """Read a loss model from a JSON file.

    Expected keys: transmission_loss_db_per_km, connector_loss_db,
    splice_loss_db, engineering_margin_db, and splitter_loss_db as a map
    keyed by output port count. Numbers are parsed as exact decimals.
    """
    p = Path(path)
    data = json.loads(p.read_text(), parse_float=Decimal)
    try:
        return LossModel(
            name=str(data.get("name", p.stem)),
            transmission_loss_db_per_km=to_decimal(data["transmission_loss_db_per_km"]),
            connector_loss_db=to_decimal(data["connector_loss_db"]),
            splice_loss_db=to_decimal(data["splice_loss_db"]),
            splitter_loss_db={int(k): to_decimal(v) for k, v in data["splitter_loss_db"].items()},
            engineering_margin_db=to_decimal(data["engineering_margin_db"]),
        )
    except KeyError as exc:
        raise ValueError(f"loss model file {p} is missing key {exc}") from None


@dataclass(frozen=True)
class PathLossBreakdown:
    """Per-component losses for one path; total_db is their exact sum."""

    transmission_db: Decimal
    connector_db: Decimal
    splitter_db: Decimal
    splice_db: Decimal
    engineering_margin_db: Decimal
    total_db: Decimal

    def __post_init__(self):
        parts = (
            self.transmission_db
            + self.connector_db
            + self.splitter_db
            + self.splice_db
            + self.engineering_margin_db
        )
        if parts != self.total_db:
            raise ValueError(f"total_db {self.total_db} does not equal the component sum {parts}")

    def to_dict(self) -> dict:
        return {
            "transmission_db": self.transmission_db,
            "connector_db": self.connector_db,
            "splitter_db": self.splitter_db,
            "splice_db": self.splice_db,
            "engineering_margin_db": self.engineering_margin_db,
            "total_db": self.total_db,
        }


def path_loss(path: PathDescriptor, model: LossModel) -> PathLossBreakdown:
    """Evaluate the loss equation for one root-to-ONT path."""
    splitter_db = Decimal(0)
    for ratio in path.splitter_ratios:
        splitter_db += model.splitter_loss(ratio)
    transmission_db = to_decimal(path.length_km) * model.transmission_loss_db_per_km
    connector_db = model.connector_loss_db * path.connector_count
    splice_db = model.splice_loss_db * path.splice_count
    margin_db = model.engineering_margin_db
    total = transmission_db + connector_db + splitter_db + splice_db + margin_db
    return PathLossBreakdown(
        transmission_db=transmission_db,
        connector_db=connector_db,
        splitter_db=splitter_db,
        splice_db=splice_db,
        engineering_margin_db=margin_db,
        total_db=total,
    )


def classify_budget(total_db, thresholds: BudgetThresholds = DEFAULT_THRESHOLDS) -> BudgetStatus:
    """Place a total loss in the acceptance window; bounds are in service."""
    total = to_decimal(total_db)
    if total < 0:
        raise ValueError("total_db must be >= 0")
    if total < thresholds.min_db:
        return BudgetStatus.NEEDS_ATTENUATOR
    if total <= thresholds.max_db:
        return BudgetStatus.IN_SERVICE
    return BudgetStatus.OUT_OF_BUDGET


def attenuator_value(total_db, thresholds: BudgetThresholds = DEFAULT_THRESHOLDS) -> Decimal:
    """Attenuation in dB needed to lift an under-budget link to the floor."""
    total = to_decimal(total_db)
    if classify_budget(total, thresholds) is not BudgetStatus.NEEDS_ATTENUATOR:
        raise NotApplicableError(
            f"total loss {total} dB is not below the {thresholds.min_db} dB floor"
        )
    return thresholds.min_db - total


def worst_case_ont(tree: PonTree, model: LossModel) -> tuple[str, PathLossBreakdown]:
    """The ONT with the highest total loss; ties go to the smallest id."""
    best: Optional[tuple[str, PathLossBreakdown]] = None
    for ont in tree.onts():
        breakdown = path_loss(path_to_ont(tree, ont.id), model)
        if best is None or breakdown.total_db > best[1].total_db:
            best = (ont.id, breakdown)
    if best is None:
        raise EmptyTreeError(f"tree {tree.root_port!r} has no ONTs")
    return best


def max_reach_km(
    splitter_ratios: Sequence[int],
    connector_count: int,
    splice_count: int,
    model: LossModel,
    thresholds: BudgetThresholds = DEFAULT_THRESHOLDS,
    *,
    extra_fixed_db=Decimal("0"),
) -> Decimal:
    """Longest fibre run that still meets the budget ceiling.

    Solves the loss equation for length: everything except transmission
    loss is fixed, so reach = (max_db - fixed) / TL. extra_fixed_db adds
    miscellaneous fixed losses (for example a reconstructed connector and
    splice allowance that no whole component counts reproduce).
    """
    if connector_count < 0 or splice_count < 0:
        raise ValueError("connector and splice counts must be >= 0")
    fixed = model.engineering_margin_db + to_decimal(extra_fixed_db)
    for ratio in splitter_ratios:
        fixed += model.splitter_loss(ratio)
    fixed += model.connector_loss_db * connector_count
    fixed += model.splice_loss_db * splice_count
    if fixed >= thresholds.max_db:
        raise NoFeasibleReachError(
            f"fixed losses of {fixed} dB meet or exceed the {thresholds.max_db} dB ceiling"
        )
    if model.transmission_loss_db_per_km <= 0:
        raise ValueError("transmission loss must be positive to solve for reach")
    raw = (thresholds.max_db - fixed) / model.transmission_loss_db_per_km
    return raw.quantize(_REACH_QUANTUM, rounding=ROUND_DOWN)


@dataclass(frozen=True)
class ModelComparison:
    """Totals for one path under two models, with their signed relative gap."""

    total_a_db: Decimal
    total_b_db: Decimal
    relative_difference: Decimal


def compare_models(path: PathDescriptor, model_a: LossModel, model_b: LossModel) -> ModelComparison:
    """Evaluate one path under two models; difference is (a - b) / a."""
    total_a = path_loss(path, model_a).total_db
    total_b = path_loss(path, model_b).total_db
    if total_a == 0:
        relative = Decimal(0)
    else:
        relative = (total_a - total_b) / total_a
    return ModelComparison(total_a_db=total_a, total_b_db=total_b, relative_difference=relative)


# ------------------------- tree-level reports -------------------------


@dataclass(frozen=True)
class OntBudget:
    """Budget verdict for a single ONT."""

    ont_id: str
    breakdown: PathLossBreakdown
    status: BudgetStatus
    attenuator_db: Optional[Decimal]
    assumptions: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {"ont_id": self.ont_id, "classification": self.status.value}
        out.update(self.breakdown.to_dict())
        if self.attenuator_db is not None:
            out["attenuator_db"] = self.attenuator_db
        if self.assumptions:
            out["assumptions"] = list(self.assumptions)
        return out


def budget_tree(
    tree: PonTree,
    model: LossModel,
    thresholds: BudgetThresholds = DEFAULT_THRESHOLDS,
) -> tuple[OntBudget, ...]:
    """Per-ONT budget results for a whole tree, ordered by ONT id."""
    results = []
    for ont in tree.onts():
        path = path_to_ont(tree, ont.id)
        breakdown = path_loss(path, model)
        status = classify_budget(breakdown.total_db, thresholds)
        attenuator = (
            attenuator_value(breakdown.total_db, thresholds)
            if status is BudgetStatus.NEEDS_ATTENUATOR
            else None
        )
        assumptions = (
            (ASSUMPTION_TWO_INPUT_SPLITTER,)
            if any(s.input_ports == 2 for s in path.splitters)
            else ()
        )
        results.append(
            OntBudget(
                ont_id=ont.id,
                breakdown=breakdown,
                status=status,
                attenuator_db=attenuator,
                assumptions=assumptions,
            )
        )
    return tuple(results)
