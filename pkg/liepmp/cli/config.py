import typing as t
from pathlib import Path

from pydantic import Field, ValidationError, model_validator

from liepmp.demos import So2ManeuverSpec, So3AttitudeSpec, preset, problem_spec
from liepmp.errors import InvalidConfig
from liepmp.model.basemodel import Report
from liepmp.shooting.options import SolverOptions

type Command = t.Literal["solve", "verify", "demo", "audit"]


class RunConfig(Report):
    """One command-line run; echoed into report.json"""

    command: Command
    preset: str | None = None
    problem: str | None = None
    out: str | None = None
    tol: float = Field(default=1e-10, gt=0.0, le=1e-4)
    max_iter: int = Field(default=200, ge=1)
    segments: int | None = Field(default=None, ge=1)
    homotopy: bool = True
    seed: int = 0
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def one_problem_source(self) -> t.Self:
        if (self.preset is None) == (self.problem is None):
            raise ValueError("Give exactly one of --preset and --problem")
        return self

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            tol=self.tol,
            max_iter=self.max_iter,
            segments=self.segments,
            homotopy=self.homotopy,
            threads=self.threads,
        )

    def load_spec(self) -> So2ManeuverSpec | So3AttitudeSpec:
        """
        Raises:
            InvalidConfig: for an unknown preset or an unreadable or invalid problem document.
        """
        if self.preset is not None:
            return preset(self.preset)
        path = Path(self.problem)
        try:
            return problem_spec.validate_json(path.read_text())
        except OSError as e:
            raise InvalidConfig(f"Cannot read problem document {path}: {e}") from e
        except ValidationError as e:
            raise InvalidConfig(f"Invalid problem document {path}: {e}") from e

    def out_dir(self, name: str) -> Path:
        return Path(self.out) if self.out is not None else Path("runs") / name
