import typing as t
from dataclasses import dataclass

import numpy as np

from liepmp.lie.coadjoint import dexp_dual, dexp_dual_inverse
from liepmp.lie.group import AlgebraVector, CoAlgebraVector, Vector
from liepmp.model.dynamics import Trajectory
from liepmp.model.reports import ResidualReport


@dataclass(frozen=True)
class Costate:
    """
    Adjoint variables at time t: ρᵗ, the coadjoint-propagated costate paired with
    the group variation, and ξᵗ for the Euclidean state. The Hamiltonian costate ζᵗ
    is derived from ρᵗ at the step direction a_t = log(s_t), never stored.
    """

    rho: CoAlgebraVector
    xi: Vector

    def __post_init__(self):
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))

    def zeta(self, a: AlgebraVector) -> CoAlgebraVector:
        return dexp_dual(a, self.rho)

    @classmethod
    def from_zeta(cls, a: AlgebraVector, zeta: CoAlgebraVector, xi: Vector) -> "Costate":
        return cls(rho=dexp_dual_inverse(a, zeta), xi=xi)

    def vector(self) -> Vector:
        return np.concatenate([self.rho.c, self.xi])

    def __add__(self, other: "Costate") -> "Costate":
        return Costate(self.rho + other.rho, self.xi + other.xi)

    def __mul__(self, scalar: float) -> "Costate":
        return Costate(self.rho * scalar, scalar * self.xi)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Multipliers:
    """State-constraint multipliers μᵗ for t = 1..N (mu[t-1]) and the cost multiplier ν"""

    mu: tuple[Vector, ...]
    nu: float = -1.0

    def __post_init__(self):
        if self.nu not in (-1.0, 0.0):
            raise ValueError(f"ν must be -1 or 0, got {self.nu}")
        object.__setattr__(
            self, "mu", tuple(np.atleast_1d(np.asarray(m, dtype=float)) for m in self.mu)
        )

    def at(self, t: int) -> Vector:
        return self.mu[t - 1]

    @classmethod
    def zeros(cls, counts: t.Sequence[int], nu: float = -1.0) -> "Multipliers":
        return cls(mu=tuple(np.zeros(n) for n in counts), nu=nu)

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(m))) for m in self.mu if m.size), default=0.0)


@dataclass(frozen=True)
class ExtremalTrajectory:
    trajectory: Trajectory
    controls: np.ndarray  # (N, n_u)
    costates: tuple[Costate, ...]  # t = 0..N-1
    multipliers: Multipliers
    residuals: ResidualReport | None = None

    @property
    def N(self) -> int:
        return len(self.costates)
