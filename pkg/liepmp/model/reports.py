import typing as t

from liepmp.model.basemodel import Report

type IssueCode = t.Literal[
    "ConvexityViolation",
    "DerivativeMismatch",
    "BranchDomainViolation",
    "HorizonViolation",
    "DimensionMismatch",
]


class Issue(Report):
    code: IssueCode
    message: str


class ValidationReport(Report):
    """Violated problem invariants; an empty list means the problem is accepted"""

    issues: list[Issue] = []

    @property
    def accepted(self) -> bool:
        return len(self.issues) == 0

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}


class ResidualReport(Report):
    """Per-condition maximum residuals of the first-order conditions"""

    nu: float
    dynamics_defect: float
    adjoint_defect: float
    adjoint_defect_at: int | None = None
    transversality: float
    stationarity: float
    complementarity: float
    max_multiplier: float
    nontriviality_gauge: float
    maximization_gap: float | None = None
    flags: list[t.Literal["NonTrivialityViolation", "SingularArc"]] = []

    def max_residual(self) -> float:
        return max(
            self.dynamics_defect,
            self.adjoint_defect,
            self.transversality,
            self.stationarity,
            self.complementarity,
        )


class StageRecord(Report):
    """One continuation stage of a homotopy solve"""

    level: float
    constrained: bool
    converged: bool
    iterations: int
    residual: float


class SolveReport(Report):
    converged: bool
    iterations: int
    residual: float
    nu: float
    segments: int
    unknowns: int
    residuals: ResidualReport | None = None
    abnormal_residual: float | None = None
    abnormal_candidate: bool = False
    active_set: list[int] = []
    homotopy: list[StageRecord] = []
    message: str = ""


class AuditEntry(Report):
    quantity: str
    max_rel_error: float


class AuditReport(Report):
    points: int
    entries: list[AuditEntry]

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    def error_of(self, quantity: str) -> float:
        return next(e.max_rel_error for e in self.entries if e.quantity == quantity)
