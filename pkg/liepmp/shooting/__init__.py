from .layout import ShootingLayout, default_segments
from .options import SolverOptions
from .solver import ShootingProblem, assemble_residual, homotopy_solve, solve

__all__ = [
    "ShootingLayout",
    "ShootingProblem",
    "SolverOptions",
    "assemble_residual",
    "default_segments",
    "homotopy_solve",
    "solve",
]
