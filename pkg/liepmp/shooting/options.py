import typing as t

from pydantic import Field

from liepmp.model.basemodel import Report


class SolverOptions(Report):
    """Damped-Newton multiple shooting and homotopy settings"""

    tol: float = Field(default=1e-10, gt=0.0, le=1e-4)
    max_iter: int = Field(default=200, ge=1)
    segments: int | None = Field(default=None, ge=1)
    homotopy: bool = True
    homotopy_relax: float = Field(default=10.0, gt=1.0)
    homotopy_factor: float = Field(default=0.7, gt=0.0, lt=1.0)
    homotopy_max_stages: int = Field(default=20, ge=1)
    threads: int = Field(default=1, ge=1)

    def with_(self, **changes: t.Any) -> "SolverOptions":
        return self.model_copy(update=changes)
