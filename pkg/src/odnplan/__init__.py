"""GPON/FTTx optical distribution network planning toolkit.

Models the passive plant between an OLT and its ONTs, budgets optical
loss against the class B+ window, sizes splitters and cables, audits
drawn plans against placement rules, and round-trips everything through
GeoJSON layer bundles.
"""

from .budget import (
    BudgetStatus,
    BudgetThresholds,
    DEFAULT_THRESHOLDS,
    LossModel,
    ModelComparison,
    OntBudget,
    PathLossBreakdown,
    PRESETS,
    attenuator_value,
    budget_tree,
    classify_budget,
    compare_models,
    load_loss_model,
    max_reach_km,
    path_loss,
    preset,
    worst_case_ont,
)
from .dimensioning import (
    Bom,
    CableLadder,
    DEFAULT_LADDER,
    OltCapacity,
    bandwidth_per_tenant,
    bom,
    cable_size,
    olt_total_ports,
    pon_ports_required,
    splitter_count,
)
from .errors import (
    BundleError,
    DanglingReferenceError,
    DegenerateControlPointsError,
    DisconnectedOntError,
    EmptyTreeError,
    GeometryTypeMismatchError,
    InsufficientCapacityError,
    InvalidParamsError,
    InvalidPlanError,
    MissingAlternateRouteError,
    NoFeasibleReachError,
    NotApplicableError,
    OdnPlanError,
    RoutesNotDisjointError,
    SchemaError,
    TooFewPointsError,
    UnknownOntError,
    UnknownSplitterRatioError,
    ControlPointCountWarning,
)
from .geodata import (
    AffineTransform,
    ControlPoint,
    PlanDocument,
    PlanMetadata,
    REQUIRED_LAYERS,
    apply_affine,
    assemble_plan,
    attach_budget,
    emit_plan,
    fit_affine,
    geodesic_length_km,
    load_plan,
    plan_from_trees,
    read_control_points,
    save_bundle,
    validate_plan,
)
from .geomath import EARTH_RADIUS_KM, haversine_km, polyline_length_km
from .model import (
    DEFAULT_SPLIT_CAP,
    FiberSegment,
    MAX_SPLITTER_LEVELS,
    NodeKind,
    OdnNode,
    PathDescriptor,
    PonTree,
    SegmentRole,
    SPLITTER_OUTPUT_SIZES,
    STANDARD_FIBER_COUNTS,
    SplitterSpec,
    Violation,
    path_to_ont,
    to_decimal,
    total_split,
    validate_topology,
)
from .planner import (
    AlternateRoute,
    DemandPoint,
    FdhSite,
    FttxVariant,
    ProtectionType,
    ScenarioName,
    ScenarioParams,
    ServiceArea,
    SplitterSetting,
    apply_protection,
    assign_fdh_areas,
    check_rules,
    classify_fttx,
    demand_points_from_areas,
    olt_boundaries,
    scenario_template,
    service_areas,
)

__version__ = "0.1.0"
