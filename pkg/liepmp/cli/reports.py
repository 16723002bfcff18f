from liepmp.cli.config import RunConfig
from liepmp.model.basemodel import Report
from liepmp.model.reports import AuditReport, SolveReport, ValidationReport


class DemoReport(Report):
    max_abs_u: float
    control_bound: float
    saturates: bool
    saturated_at_ends: bool
    active_constraint_steps: int
    final_state: list[float]
    final_angle_deg: float | None = None
    angle_travel_raw_rad: float | None = None
    angle_travel_unwrapped_rad: float | None = None
    wraps: bool | None = None
    energy_drift: float | None = None


class VerifyReport(Report):
    audit: AuditReport
    equivariance: float | None = None
    oracle_cost: float | None = None
    pmp_cost: float | None = None
    oracle_relative_gap: float | None = None
    oracle_kkt_norm: float | None = None
    skipped: list[str] = []
    failures: list[str] = []

    @property
    def passed(self) -> bool:
        return not self.failures


class RunReport(Report):
    """Everything written to report.json for one run"""

    config: RunConfig
    exit_code: int
    message: str = ""
    validation: ValidationReport | None = None
    solve: SolveReport | None = None
    demo: DemoReport | None = None
    verify: VerifyReport | None = None
    audit: AuditReport | None = None
