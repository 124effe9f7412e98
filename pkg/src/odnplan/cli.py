"""Command-line surface: machine-readable planning reports.

Every command prints one deterministic report (JSON by default) to
standard output. Exit codes: 0 success, 1 input or usage error, 2 the
inputs are readable but violate the domain rules (failed validation,
infeasible reach, plan errors).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import warnings
from decimal import Decimal
from pathlib import Path
from typing import Optional

from . import __version__
from .budget import (
    BudgetThresholds,
    DEFAULT_THRESHOLDS,
    PRESETS,
    load_loss_model,
    LossModel,
    budget_tree,
    max_reach_km,
    path_loss,
    worst_case_ont,
)
from .dimensioning import (
    CableLadder,
    DEFAULT_LADDER,
    OltCapacity,
    bandwidth_per_tenant,
    bom as build_bom,
    cable_size,
    olt_total_ports,
    pon_ports_required,
    splitter_count,
)
from .errors import (
    BundleError,
    EmptyTreeError,
    InvalidPlanError,
    NoFeasibleReachError,
    OdnPlanError,
    UnknownOntError,
)
from .geodata import fit_affine, load_plan, read_control_points, validate_plan
from .model import PathDescriptor, to_decimal
from .planner import check_rules

CONFIG_ENV_VAR = "ODN_PLANNER_CONFIG"

DEFAULT_DOWNSTREAM_MBPS = 2400


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the exit-code contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _DecimalEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, Decimal):
            return float(o)
        return super().default(o)


def _digest_path(path: str) -> str:
    p = Path(path)
    h = hashlib.sha256()
    if p.is_dir():
        for child in sorted(p.rglob("*")):
            if child.is_file():
                h.update(child.name.encode())
                h.update(child.read_bytes())
    else:
        h.update(p.read_bytes())
    return f"sha256:{h.hexdigest()}"


def _report(command: str, inputs: dict, results, violations=()) -> dict:
    return {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "results": results,
        "violations": [v.to_dict() if hasattr(v, "to_dict") else v for v in violations],
    }


def _print_json(report: dict):
    print(json.dumps(report, indent=2, sort_keys=True, cls=_DecimalEncoder))


def _load_config() -> dict:
    path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh, parse_float=Decimal)


def _thresholds(config: dict) -> BudgetThresholds:
    section = config.get("thresholds")
    if not section:
        return DEFAULT_THRESHOLDS
    return BudgetThresholds(
        min_db=to_decimal(section.get("min_db", DEFAULT_THRESHOLDS.min_db)),
        max_db=to_decimal(section.get("max_db", DEFAULT_THRESHOLDS.max_db)),
    )


def _ladder(config: dict) -> CableLadder:
    sizes = config.get("ladder")
    return CableLadder(tuple(int(s) for s in sizes)) if sizes else DEFAULT_LADDER


def _downstream(config: dict) -> Decimal:
    return to_decimal(config.get("downstream_mbps", DEFAULT_DOWNSTREAM_MBPS))


def _model(name: str) -> LossModel:
    if name in PRESETS:
        return PRESETS[name]
    return load_loss_model(name)


def _rows_as_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item", "unit", "quantity"])
    for item, unit, qty in rows:
        writer.writerow([item, unit, qty])
    return buf.getvalue()


def _rows_as_text(rows) -> str:
    width = max((len(item) for item, _, _ in rows), default=8) + 2
    lines = [f"{'item':<{width}}{'unit':<8}quantity"]
    for item, unit, qty in rows:
        lines.append(f"{item:<{width}}{unit:<8}{qty}")
    return "\n".join(lines)


# ------------------------- commands -------------------------


def cmd_validate(args, config) -> int:
    plan = load_plan(args.bundle)
    violations = list(validate_plan(plan))
    violations += check_rules(
        plan, drum_length_km=float(config.get("drum_length_km", 2.0))
    )
    seen = set()
    unique = []
    for v in violations:
        key = (v.code, v.subject_id)
        if key not in seen:
            seen.add(key)
            unique.append(v)
    unique.sort(key=lambda v: (v.severity != "error", v.code, v.subject_id))
    errors = sum(1 for v in unique if v.severity == "error")
    results = {
        "trees": len(plan.trees),
        "onts": sum(len(t.onts()) for t in plan.trees),
        "errors": errors,
        "warnings": len(unique) - errors,
    }
    _print_json(_report("validate", {args.bundle: _digest_path(args.bundle)}, results, unique))
    return 2 if errors else 0


def _ont_budgets(plan, model, thresholds, args) -> list[dict]:
    entries = []
    if args.ont:
        for tree in plan.trees:
            node = tree.nodes_by_id.get(args.ont)
            if node is not None:
                for entry in budget_tree(tree, model, thresholds):
                    if entry.ont_id == args.ont:
                        entries.append((tree.root_port, entry))
                break
        if not entries:
            raise UnknownOntError(f"no ONT with id {args.ont!r} in any tree")
    elif args.worst_case:
        for tree in plan.trees:
            try:
                ont_id, _ = worst_case_ont(tree, model)
            except EmptyTreeError:
                continue
            for entry in budget_tree(tree, model, thresholds):
                if entry.ont_id == ont_id:
                    entries.append((tree.root_port, entry))
    else:
        for tree in plan.trees:
            for entry in budget_tree(tree, model, thresholds):
                entries.append((tree.root_port, entry))
    out = []
    for root_port, entry in entries:
        d = entry.to_dict()
        d["root_port"] = root_port
        out.append(d)
    out.sort(key=lambda d: (d["ont_id"], d["root_port"]))
    return out


def cmd_budget(args, config) -> int:
    plan = load_plan(args.bundle)
    model = _model(args.model)
    thresholds = _thresholds(config)
    results = _ont_budgets(plan, model, thresholds, args)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ont_id", "root_port", "total_db", "classification", "attenuator_db"])
        for d in results:
            writer.writerow(
                [d["ont_id"], d["root_port"], d["total_db"], d["classification"], d.get("attenuator_db", "")]
            )
        print(buf.getvalue(), end="")
    elif args.format == "text":
        print(f"{'ont_id':<20}{'total_db':<12}{'classification':<20}attenuator_db")
        for d in results:
            print(
                f"{d['ont_id']:<20}{d['total_db']:<12}{d['classification']:<20}"
                f"{d.get('attenuator_db', '')}"
            )
    else:
        _print_json(
            _report(
                "budget",
                {args.bundle: _digest_path(args.bundle)},
                {"model": model.name, "onts": results},
            )
        )
    return 0


def cmd_reach(args, config) -> int:
    model = _model(args.model)
    thresholds = _thresholds(config)
    ratios = tuple(int(r) for r in args.splitters.split(",") if r) if args.splitters else ()
    extra = to_decimal(args.extra_db)
    inputs: dict = {}
    split = 1
    for r in ratios:
        split *= r
    try:
        reach = max_reach_km(
            ratios, args.connectors, args.splices, model, thresholds, extra_fixed_db=extra
        )
    except NoFeasibleReachError as exc:
        report = _report(
            "reach",
            inputs,
            {
                "feasible": False,
                "explanation": str(exc),
                "model": model.name,
                "splitters": list(ratios),
            },
        )
        _print_json(report)
        return 2
    path = PathDescriptor.synthetic(reach, ratios, args.connectors, args.splices)
    breakdown = path_loss(path, model)
    downstream = _downstream(config)
    results = {
        "feasible": True,
        "model": model.name,
        "splitters": list(ratios),
        "connectors": args.connectors,
        "splices": args.splices,
        "extra_fixed_db": extra,
        "max_reach_km": reach,
        "total_split": split,
        "downstream_mbps": downstream,
        "bandwidth_per_tenant_mbps": bandwidth_per_tenant(downstream, split),
        "loss_at_max_reach": breakdown.to_dict(),
        "total_db_with_extra": breakdown.total_db + extra,
    }
    _print_json(_report("reach", inputs, results))
    return 0


def cmd_dimension(args, config) -> int:
    ladder = _ladder(config)
    downstream = _downstream(config)
    splitters = splitter_count(args.tenants, args.split)
    ports = pon_ports_required(args.tenants, args.split)
    results = {
        "tenants": args.tenants,
        "split": args.split,
        "splitter_count": splitters,
        "pon_ports": ports,
        "cable_size_fibers": cable_size(args.tenants, ladder),
        "bandwidth_per_tenant_mbps": bandwidth_per_tenant(downstream, args.split),
    }
    if args.olt:
        parts = [int(x) for x in args.olt.split(",")]
        if len(parts) != 3:
            raise ValueError("--olt takes sub_racks,cards_per_rack,ports_per_card")
        capacity = OltCapacity(*parts)
        total = olt_total_ports(capacity)
        results["olt"] = {
            "total_ports": total,
            "utilization_percent": Decimal(ports) / total * 100,
        }
    _print_json(_report("dimension", {}, results))
    return 0


def cmd_georef(args, config) -> int:
    points = read_control_points(args.points)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        transform, rms = fit_affine(points)
    notes = [str(w.message) for w in caught]
    results = {
        "points": len(points),
        "transform": transform.to_dict(),
        "rms_residual_degrees": rms,
        "warnings": notes,
    }
    _print_json(_report("georef", {args.points: _digest_path(args.points)}, results))
    return 0


def cmd_bom(args, config) -> int:
    plan = load_plan(args.bundle)
    model = _model(args.model) if args.model else None
    try:
        result = build_bom(plan, model, _thresholds(config))
    except InvalidPlanError as exc:
        report = _report(
            "bom",
            {args.bundle: _digest_path(args.bundle)},
            {"error": str(exc)},
            exc.violations,
        )
        _print_json(report)
        return 2
    rows = result.to_rows()
    if args.format == "csv":
        print(_rows_as_csv(rows), end="")
    elif args.format == "text":
        print(_rows_as_text(rows))
    else:
        items = [{"item": item, "unit": unit, "quantity": qty} for item, unit, qty in rows]
        _print_json(_report("bom", {args.bundle: _digest_path(args.bundle)}, {"items": items}))
    return 0


# ------------------------- wiring -------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="odnplan", description="GPON/FTTx distribution network planning")
    parser.add_argument("--version", action="version", version=f"odnplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="topology and placement rule audit of a plan bundle")
    p.add_argument("bundle", help="bundle directory, manifest, or single-file plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("budget", help="optical loss budgets per ONT")
    p.add_argument("bundle")
    p.add_argument("--model", default="theoretical", help="preset name or loss-model JSON file")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--ont", help="budget a single ONT by id")
    group.add_argument("--worst-case", action="store_true", help="only the lossiest ONT per tree")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("reach", help="maximum feasible span for a splitter stack")
    p.add_argument("--splitters", default="", help="comma-separated ratios, e.g. 2,32")
    p.add_argument("--connectors", type=int, default=0)
    p.add_argument("--splices", type=int, default=0)
    p.add_argument("--extra-db", default="0", help="additional fixed loss in dB")
    p.add_argument("--model", default="theoretical")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("dimension", help="splitter, port, and cable counts for a tenant pool")
    p.add_argument("--tenants", type=int, required=True)
    p.add_argument("--split", type=int, required=True)
    p.add_argument("--olt", help="sub_racks,cards_per_rack,ports_per_card")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("georef", help="fit an affine transform to control points")
    p.add_argument("--points", required=True, help="CSV or JSON control point file")
    p.set_defaults(func=cmd_georef)

    p = sub.add_parser("bom", help="bill of materials for a plan bundle")
    p.add_argument("bundle")
    p.add_argument("--model", help="count attenuators using this loss model")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.set_defaults(func=cmd_bom)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config()
        return args.func(args, config)
    except BundleError as exc:
        print(f"odnplan: {exc}", file=sys.stderr)
        for diag in exc.diagnostics:
            print(f"  - {diag}", file=sys.stderr)
        return 1
    except OdnPlanError as exc:
        print(f"odnplan: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"odnplan: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
