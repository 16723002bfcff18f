"""
Problem definitions: discrete-time optimal control problems on G × ℝⁿ.

The dynamics are

    q_{t+1} = q_t · s_t(q_t, x_t),      x_{t+1} = f_t(q_t, x_t, u_t),

with stage costs c_t, an optional final cost c_N, optional state constraints
g_t(q_t, x_t) ≤ 0 for t = 1..N, a box of feasible controls and boundary data.

Derivative hooks are optional. Their conventions, all in hat coordinates:

- step partials `(Sq, Sx)`: s⁻¹·δs = hat(Sq·η + Sx·δx) for δq = q·hat(η);
- euclid partials `(Fq, Fx, Fu)`, with Fq taken along left-translated directions;
- stage cost partials `(cq, cx, cu)`, with cq the trivialized group gradient;
- final cost partials `(cq, cx)`;
- constraint partials `(Gq, Gx)`.

`state_guess(t)` optionally supplies a reference state at time t for solver
initialization; `state_scale` bounds the Euclidean sample states used by `validate`.

User maps must be pure functions; problems are immutable once constructed.
"""

import dataclasses
import typing as t
from dataclasses import dataclass, field

import numpy as np

from liepmp.lie.group import GroupElement, GroupKind, Matrix, Vector

type StepFn = t.Callable[[int, GroupElement, Vector], GroupElement]
type StepPartialsFn = t.Callable[[int, GroupElement, Vector], tuple[Matrix, Matrix]]
type EuclidFn = t.Callable[[int, GroupElement, Vector, Vector], Vector]
type EuclidPartialsFn = t.Callable[
    [int, GroupElement, Vector, Vector], tuple[Matrix, Matrix, Matrix]
]
type StageCostFn = t.Callable[[int, GroupElement, Vector, Vector], float]
type StageCostPartialsFn = t.Callable[
    [int, GroupElement, Vector, Vector], tuple[Vector, Vector, Vector]
]
type FinalCostFn = t.Callable[[GroupElement, Vector], float]
type FinalCostPartialsFn = t.Callable[[GroupElement, Vector], tuple[Vector, Vector]]
type ConstraintFn = t.Callable[[int, GroupElement, Vector, float], Vector]
type ConstraintPartialsFn = t.Callable[
    [int, GroupElement, Vector, float], tuple[Matrix, Matrix]
]
type SubmersionFn = t.Callable[[GroupElement, Vector], Vector]
type ImplicitResidualFn = t.Callable[[int, GroupElement, GroupElement, Vector], Vector]
type ImplicitPartialsFn = t.Callable[
    [int, GroupElement, GroupElement, Vector], tuple[Matrix, Matrix, Matrix]
]


@dataclass(frozen=True)
class Box:
    """Componentwise bounds on the control, lo ≤ u ≤ hi"""

    lo: Vector
    hi: Vector

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))

    @classmethod
    def symmetric(cls, bound: float | t.Sequence[float]) -> "Box":
        b = np.atleast_1d(np.asarray(bound, dtype=float))
        return cls(-b, b)

    @property
    def dim(self) -> int:
        return self.lo.size

    def is_valid(self) -> bool:
        return self.lo.shape == self.hi.shape and bool(np.all(self.lo <= self.hi))

    def contains(self, u: Vector, *, tol: float = 0.0) -> bool:
        return bool(np.all(u >= self.lo - tol) and np.all(u <= self.hi + tol))

    def clamp(self, u: Vector) -> Vector:
        return np.minimum(np.maximum(u, self.lo), self.hi)


@dataclass(frozen=True)
class FixedBoth:
    """Both endpoints given and fixed"""

    q0: GroupElement
    x0: Vector
    qN: GroupElement
    xN: Vector


@dataclass(frozen=True)
class FixedInitFreeFinal:
    """Fixed initial state, free final state"""

    q0: GroupElement
    x0: Vector


@dataclass(frozen=True)
class FixedInitSubmanifold:
    """
    Fixed initial state; the final state lies on the zero level set of the
    submersion `b_fin`. `b_fin_partials(q, x)` returns (Bq, Bx) when supplied.
    """

    q0: GroupElement
    x0: Vector
    b_fin: SubmersionFn
    b_fin_partials: t.Callable[[GroupElement, Vector], tuple[Matrix, Matrix]] | None = None


type BoundarySpec = FixedBoth | FixedInitFreeFinal | FixedInitSubmanifold


@dataclass(frozen=True)
class ImplicitStepSpec:
    """
    The group step defined implicitly by v_t(s, q, x) = 0 (values in ℝ^{n_q}).
    `guess` is either a fixed element or a map (t, q, x) -> initial guess.
    `partials(t, s, q, x)` returns (Ds, Dq, Dx), with Ds and Dq taken along
    left-translated directions s·exp(hat(w)) and q·exp(hat(η)).
    """

    residual: ImplicitResidualFn
    guess: GroupElement | t.Callable[[int, GroupElement, Vector], GroupElement]
    partials: ImplicitPartialsFn | None = None

    def initial_guess(self, t_: int, q: GroupElement, x: Vector) -> GroupElement:
        if isinstance(self.guess, GroupElement):
            return self.guess
        return self.guess(t_, q, x)


@dataclass(frozen=True)
class StateConstraint:
    """
    State constraints g_t(q, x; level) ≤ 0 for t = 1..N. `count(t)` is n_g(t), and
    may be zero. `level` is the scalar bound that homotopy relaxes and tightens.
    """

    fn: ConstraintFn
    count: t.Callable[[int], int]
    level: float
    partials: ConstraintPartialsFn | None = None


@dataclass(frozen=True)
class QuadraticControl:
    """
    Declares c_t = ½ Σ w_i u_i² + (terms free of u) and f_t affine in u, so the
    normal control law is a clamp of the unconstrained stationary point.
    """

    weight: Vector

    def __post_init__(self):
        object.__setattr__(
            self, "weight", np.atleast_1d(np.asarray(self.weight, dtype=float))
        )


@dataclass(frozen=True)
class LieOCP:
    """A discrete-time optimal control problem on G × ℝ^{n_x}"""

    kind: GroupKind
    N: int
    n_x: int
    n_u: int
    step: StepFn | ImplicitStepSpec
    euclid: EuclidFn
    stage_cost: StageCostFn
    control_set: Box
    boundary: BoundarySpec
    final_cost: FinalCostFn | None = None
    constraints: StateConstraint | None = None
    step_partials: StepPartialsFn | None = None
    euclid_partials: EuclidPartialsFn | None = None
    stage_cost_partials: StageCostPartialsFn | None = None
    final_cost_partials: FinalCostPartialsFn | None = None
    quadratic_control: QuadraticControl | None = None
    state_guess: t.Callable[[int], tuple[GroupElement, Vector]] | None = None
    state_scale: float = 1.0
    name: str = ""
    metadata: dict[str, t.Any] = field(default_factory=dict, compare=False)

    @property
    def n_q(self) -> int:
        return self.kind.n_q

    @property
    def is_implicit(self) -> bool:
        return isinstance(self.step, ImplicitStepSpec)

    def constraint_count(self, t_: int) -> int:
        """n_g(t); zero outside 1..N or without constraints."""
        if self.constraints is None or not 1 <= t_ <= self.N:
            return 0
        return self.constraints.count(t_)

    def constraint(self, t_: int, q: GroupElement, x: Vector) -> Vector:
        if self.constraint_count(t_) == 0:
            return np.zeros(0)
        assert self.constraints is not None
        return np.atleast_1d(
            np.asarray(self.constraints.fn(t_, q, x, self.constraints.level), dtype=float)
        )

    def with_constraint_level(self, level: float) -> "LieOCP":
        if self.constraints is None:
            return self
        return dataclasses.replace(
            self, constraints=dataclasses.replace(self.constraints, level=level)
        )

    def with_boundary(self, boundary: BoundarySpec) -> "LieOCP":
        return dataclasses.replace(self, boundary=boundary)

    def initial_state(self) -> tuple[GroupElement, Vector]:
        b = self.boundary
        return b.q0, np.atleast_1d(np.asarray(b.x0, dtype=float))


__all__ = [
    "Box",
    "BoundarySpec",
    "FixedBoth",
    "FixedInitFreeFinal",
    "FixedInitSubmanifold",
    "ImplicitStepSpec",
    "LieOCP",
    "QuadraticControl",
    "StateConstraint",
]
