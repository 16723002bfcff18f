from .adjoint import adjoint_step, forward_adjoint_step
from .control import (
    ControlChoice,
    control_argmax,
    control_choice,
    maximization_gap,
    stationarity_residual,
)
from .costate import Costate, ExtremalTrajectory, Multipliers
from .extremal import (
    check_extremal,
    complementarity_residual,
    fischer_burmeister,
)
from .hamiltonian import HamiltonianPartials, hamiltonian, hamiltonian_partials
from .transversality import transversality_free, transversality_submanifold

__all__ = [
    "ControlChoice",
    "Costate",
    "ExtremalTrajectory",
    "HamiltonianPartials",
    "Multipliers",
    "adjoint_step",
    "check_extremal",
    "complementarity_residual",
    "control_argmax",
    "control_choice",
    "fischer_burmeister",
    "forward_adjoint_step",
    "hamiltonian",
    "hamiltonian_partials",
    "maximization_gap",
    "stationarity_residual",
    "transversality_free",
    "transversality_submanifold",
]
