"""Exception types shared across the toolkit."""


class CoxkitError(Exception):
    """Base class for all toolkit errors."""


class CapExceeded(CoxkitError):
    """An enumeration would exceed the configured materialization cap."""


class PreconditionUnmet(CoxkitError):
    """An operation was invoked on inputs that violate its precondition."""


class ExtensionInconsistent(CoxkitError):
    """A product extension violates one of the base axioms (the failure
    signal for consistency under extension)."""


class MeshUnreachable(CoxkitError):
    """Densification cannot reach the requested mesh within the budget."""


class NonAssociativeData(CoxkitError):
    """Generator recovery found residuals incompatible with an additive
    representation; an upstream associativity check should have failed."""


class DegenerateRange(CoxkitError):
    """Normalization is impossible because max P equals min P."""


class NoFixedPoint(CoxkitError):
    """The negation map does not cross the diagonal as a strictly
    decreasing function must; signals an earlier failure."""


class UnknownName(CoxkitError):
    """Unknown gallery entry name."""


class BadParams(CoxkitError):
    """Malformed parameters for a gallery builder or CLI invocation."""


class ExhaustedBudget(CoxkitError):
    """Counterexample search ran out of budget before finding a structure.

    Carries the search statistics for reporting.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class PipelineError(CoxkitError):
    """A pipeline stage failed; carries the stage label and the report."""

    def __init__(self, stage, message, report=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.report = report
