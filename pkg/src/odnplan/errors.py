"""Exception types shared across the planning toolkit.

Topology problems detected during validation are reported as Violation
records, not exceptions; the classes here cover operations that cannot
return a meaningful result at all (bad lookups, infeasible arithmetic,
unreadable bundles).
"""

from __future__ import annotations


class OdnPlanError(Exception):
    """Base class for all toolkit errors."""


class UnknownOntError(OdnPlanError):
    """The requested id does not name an ONT in the tree."""


class DisconnectedOntError(OdnPlanError):
    """The ONT exists but has no path to the root."""


class EmptyTreeError(OdnPlanError):
    """The tree carries no ONTs, so the operation has no subject."""


class UnknownSplitterRatioError(OdnPlanError):
    """The loss model defines no coefficient for the requested ratio."""


class NoFeasibleReachError(OdnPlanError):
    """Fixed losses already meet or exceed the budget ceiling."""


class NotApplicableError(OdnPlanError):
    """The operation does not apply to the given classification."""


class InvalidPlanError(OdnPlanError):
    """The plan fails topology validation; carries the violation list."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InsufficientCapacityError(OdnPlanError):
    """Demand cannot be fully assigned; carries the unassigned residual."""

    def __init__(self, message: str, unassigned=None, assigned=None):
        super().__init__(message)
        self.unassigned = dict(unassigned or {})
        self.assigned = dict(assigned or {})
        self.residual_tenants = sum(self.unassigned.values())


class RoutesNotDisjointError(OdnPlanError):
    """A protection route shares a segment or node with the primary route."""


class MissingAlternateRouteError(OdnPlanError):
    """Protection was requested without a route for a protected hub."""


class InvalidParamsError(OdnPlanError):
    """Scenario parameters are out of range for the requested template."""


class DegenerateControlPointsError(OdnPlanError):
    """Control points are too few, collinear, or duplicated."""


class TooFewPointsError(OdnPlanError):
    """A polyline needs at least two vertices."""


class BundleError(OdnPlanError):
    """Base class for plan bundle load failures; carries all diagnostics."""

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class SchemaError(BundleError):
    """A layer or feature does not match the documented bundle schema."""


class DanglingReferenceError(BundleError):
    """A cable references a node id that no layer defines."""


class GeometryTypeMismatchError(BundleError):
    """A feature carries a geometry type its layer does not allow."""


class ControlPointCountWarning(UserWarning):
    """Fewer control points than the recommended minimum of four."""
