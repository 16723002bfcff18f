from .step import (
    ImplicitStepSolution,
    KappaPartials,
    kappa_partials,
    residual_partials,
    solve_step,
)

__all__ = [
    "ImplicitStepSolution",
    "KappaPartials",
    "kappa_partials",
    "residual_partials",
    "solve_step",
]
