"""
Spacecraft attitude problems: single-axis maneuvers on SO(2) with a momentum
bound, and the full attitude system on SO(3) with Euler-stepped momentum.

Units are SI for a spacecraft scaled to unit inertia: torques in N·m, momenta in
N·m·s, angles in radians.
"""

import math
import typing as t

import numpy as np
from pydantic import Field, TypeAdapter

from liepmp.errors import InvalidConfig, InvalidSpec, LogBranchCut
from liepmp.lie.coadjoint import dexp_left_matrix, trivialize_cotangent
from liepmp.lie.group import AlgebraVector, GroupElement, GroupKind, Vector, exp, hat
from liepmp.model.basemodel import Document
from liepmp.model.dynamics import simulate
from liepmp.model.problem import (
    Box,
    FixedBoth,
    FixedInitFreeFinal,
    LieOCP,
    QuadraticControl,
    StateConstraint,
)


class ManeuverDefaults(t.NamedTuple):
    h: float
    c: float
    d: float


def maneuver_defaults() -> ManeuverDefaults:
    """Sampling time 0.05 s, torque bound 25 mN·m and momentum bound 87.5 mN·m·s."""
    return ManeuverDefaults(h=0.05, c=0.025, d=0.0875)


class So2ManeuverSpec(Document):
    """Single-axis rest or spin maneuver between two angles"""

    group: t.Literal["SO2"] = "SO2"
    name: str = ""
    h: float = Field(default=maneuver_defaults().h, gt=0.0)
    N: int = Field(ge=1)
    c: float = Field(default=maneuver_defaults().c, gt=0.0)
    d: float = Field(default=maneuver_defaults().d, gt=0.0)
    theta_i: float
    theta_f: float
    omega_i: float = 0.0
    omega_f: float = 0.0

    @property
    def t_f(self) -> float:
        return self.h * self.N


class So3AttitudeSpec(Document):
    """
    Attitude maneuver with inertia J. The final state is free with the cost
    w_R·(3 - tr(R_fᵀR)) + ½·w_ω·|ω - ω_f|² unless `final` is "fixed".
    """

    group: t.Literal["SO3"] = "SO3"
    name: str = ""
    h: float = Field(gt=0.0)
    N: int = Field(ge=1)
    J: list[list[float]] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    u_max: float = Field(default=1.0, gt=0.0)
    R_i: list[list[float]] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    omega_i: list[float] = [0.0, 0.0, 0.0]
    R_f: list[list[float]] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    omega_f: list[float] = [0.0, 0.0, 0.0]
    final: t.Literal["free", "fixed"] = "free"
    w_R: float = Field(default=1.0, ge=0.0)
    w_omega: float = Field(default=1.0, ge=0.0)


ProblemSpec = t.Annotated[So2ManeuverSpec | So3AttitudeSpec, Field(discriminator="group")]
problem_spec = TypeAdapter(ProblemSpec)


def maneuver_step(h: float, omega: float) -> GroupElement:
    """F(ω) = [[√(1-h²ω²), -hω], [hω, √(1-h²ω²)]], a rotation by arcsin(hω)."""
    s = h * omega
    if abs(s) >= 1.0:
        raise LogBranchCut(f"|h·ω| = {abs(s):.6g} leaves the domain of the maneuver step")
    c = math.sqrt(1.0 - s * s)
    return GroupElement(GroupKind.SO2, np.array([[c, -s], [s, c]]))


def build_so2(spec: So2ManeuverSpec) -> LieOCP:
    """
    min Σ ½u_t²  subject to  R_{t+1} = R_t·F(ω_t),  ω_{t+1} = ω_t + h·u_t,
    |u_t| ≤ c and ½(ω_t² - d²) ≤ 0 for t = 1..N-1, both endpoints fixed.

    Raises:
        InvalidSpec: if h·d ≥ 1 or a boundary momentum is outside 1/h.
    """
    h, d, N = spec.h, spec.d, spec.N
    if h * d >= 1.0:
        raise InvalidSpec(f"h·d = {h * d:.6g} must be below 1")
    for label, omega in (("omega_i", spec.omega_i), ("omega_f", spec.omega_f)):
        if abs(h * omega) >= 1.0:
            raise InvalidSpec(f"|h·{label}| = {abs(h * omega):.6g} must be below 1")

    def step(t_: int, q: GroupElement, x: Vector) -> GroupElement:
        return maneuver_step(h, float(x[0]))

    def step_partials(t_: int, q: GroupElement, x: Vector):
        s = h * float(x[0])
        if abs(s) >= 1.0:
            raise LogBranchCut(f"|h·ω| = {abs(s):.6g} leaves the domain of the maneuver step")
        return np.zeros((1, 1)), np.array([[h / math.sqrt(1.0 - s * s)]])

    def euclid(t_: int, q: GroupElement, x: Vector, u: Vector) -> Vector:
        return x + h * u

    def euclid_partials(t_: int, q: GroupElement, x: Vector, u: Vector):
        return np.zeros((1, 1)), np.eye(1), np.array([[h]])

    def stage_cost(t_: int, q: GroupElement, x: Vector, u: Vector) -> float:
        return 0.5 * float(u @ u)

    def stage_cost_partials(t_: int, q: GroupElement, x: Vector, u: Vector):
        return np.zeros(1), np.zeros(1), np.array(u, dtype=float)

    def momentum_bound(t_: int, q: GroupElement, x: Vector, level: float) -> Vector:
        return 0.5 * (x * x - level * level)

    def momentum_bound_partials(t_: int, q: GroupElement, x: Vector, level: float):
        return np.zeros((1, 1)), np.array([[float(x[0])]])

    def state_guess(t_: int) -> tuple[GroupElement, Vector]:
        r = t_ / N
        theta = spec.theta_i + r * (spec.theta_f - spec.theta_i)
        return GroupElement.rotation(theta), np.array([spec.omega_i + r * (spec.omega_f - spec.omega_i)])

    return LieOCP(
        kind=GroupKind.SO2,
        N=N,
        n_x=1,
        n_u=1,
        step=step,
        euclid=euclid,
        stage_cost=stage_cost,
        control_set=Box.symmetric(spec.c),
        boundary=FixedBoth(
            q0=GroupElement.rotation(spec.theta_i),
            x0=np.array([spec.omega_i]),
            qN=GroupElement.rotation(spec.theta_f),
            xN=np.array([spec.omega_f]),
        ),
        constraints=StateConstraint(
            fn=momentum_bound,
            count=lambda t_: 1 if 1 <= t_ <= N - 1 else 0,
            level=d,
            partials=momentum_bound_partials,
        ),
        step_partials=step_partials,
        euclid_partials=euclid_partials,
        stage_cost_partials=stage_cost_partials,
        quadratic_control=QuadraticControl(weight=np.ones(1)),
        state_guess=state_guess,
        state_scale=d,
        name=spec.name or "so2-maneuver",
        metadata={"h": h, "theta_i": spec.theta_i, "theta_f": spec.theta_f},
    )


def _inertia(spec: So3AttitudeSpec) -> np.ndarray:
    J = np.asarray(spec.J, dtype=float)
    if J.shape != (3, 3):
        raise InvalidSpec(f"Inertia must be 3×3, got {J.shape}")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-12):
        raise InvalidSpec("Inertia must be symmetric")
    if np.min(np.linalg.eigvalsh(J)) <= 0.0:
        raise InvalidSpec("Inertia must be positive definite")
    return J


def _rotation(m: list[list[float]], label: str) -> GroupElement:
    try:
        return GroupElement(GroupKind.SO3, np.asarray(m, dtype=float))
    except ValueError as e:
        raise InvalidSpec(f"{label}: {e}") from e


def _vector3(v: list[float], label: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise InvalidSpec(f"{label} must have 3 entries, got {a.size}")
    return a


def build_so3(spec: So3AttitudeSpec) -> LieOCP:
    """
    min Σ ½|u_t|² (+ final cost)  subject to  R_{t+1} = R_t·exp(h·hat(ω_t)) and
    Jω_{t+1} = (I + h·hat(ω_t))·Jω_t + h·u_t, with |u_t|∞ ≤ u_max.

    Raises:
        InvalidSpec: if J is not symmetric positive definite or the boundary data are malformed.
    """
    h, N = spec.h, spec.N
    J = _inertia(spec)
    J_inv = np.linalg.inv(J)
    R_i, R_f = _rotation(spec.R_i, "R_i"), _rotation(spec.R_f, "R_f")
    omega_i, omega_f = _vector3(spec.omega_i, "omega_i"), _vector3(spec.omega_f, "omega_f")
    w_R, w_omega = spec.w_R, spec.w_omega

    def step(t_: int, q: GroupElement, x: Vector) -> GroupElement:
        return exp(AlgebraVector(GroupKind.SO3, h * x))

    def step_partials(t_: int, q: GroupElement, x: Vector):
        return np.zeros((3, 3)), h * dexp_left_matrix(GroupKind.SO3, h * x)

    def euclid(t_: int, q: GroupElement, x: Vector, u: Vector) -> Vector:
        return J_inv @ ((np.eye(3) + h * hat(GroupKind.SO3, x)) @ (J @ x) + h * u)

    def euclid_partials(t_: int, q: GroupElement, x: Vector, u: Vector):
        Fx = np.eye(3) + h * J_inv @ (hat(GroupKind.SO3, x) @ J - hat(GroupKind.SO3, J @ x))
        return np.zeros((3, 3)), Fx, h * J_inv

    def stage_cost(t_: int, q: GroupElement, x: Vector, u: Vector) -> float:
        return 0.5 * float(u @ u)

    def stage_cost_partials(t_: int, q: GroupElement, x: Vector, u: Vector):
        return np.zeros(3), np.zeros(3), np.array(u, dtype=float)

    def final_cost(q: GroupElement, x: Vector) -> float:
        e = x - omega_f
        return w_R * (3.0 - float(np.trace(R_f.m.T @ q.m))) + 0.5 * w_omega * float(e @ e)

    def final_cost_partials(q: GroupElement, x: Vector):
        return trivialize_cotangent(q, -w_R * R_f.m).c, w_omega * (x - omega_f)

    if spec.final == "fixed":
        boundary = FixedBoth(q0=R_i, x0=omega_i, qN=R_f, xN=omega_f)
        terminal = {}
    else:
        boundary = FixedInitFreeFinal(q0=R_i, x0=omega_i)
        terminal = {"final_cost": final_cost, "final_cost_partials": final_cost_partials}

    return LieOCP(
        kind=GroupKind.SO3,
        N=N,
        n_x=3,
        n_u=3,
        step=step,
        euclid=euclid,
        stage_cost=stage_cost,
        control_set=Box.symmetric(np.full(3, spec.u_max)),
        boundary=boundary,
        step_partials=step_partials,
        euclid_partials=euclid_partials,
        stage_cost_partials=stage_cost_partials,
        quadratic_control=QuadraticControl(weight=np.ones(3)),
        state_scale=max(1.0, float(np.max(np.abs(omega_i))), float(np.max(np.abs(omega_f)))),
        name=spec.name or "so3-attitude",
        metadata={"h": h, "J": J},
        **terminal,
    )


def build(spec: So2ManeuverSpec | So3AttitudeSpec) -> LieOCP:
    match spec:
        case So2ManeuverSpec():
            return build_so2(spec)
        case So3AttitudeSpec():
            return build_so3(spec)


def energy_drift(spec: So3AttitudeSpec, controls: np.ndarray | None = None) -> float:
    """
    max_t |E_t - E_0| for the kinetic energy E = ½ωᵀJω along the simulated
    trajectory (torque-free by default). The Euler momentum step does not
    conserve E, so this measures the discretization drift.
    """
    p = build_so3(spec)
    J = p.metadata["J"]
    u = np.zeros((p.N, 3)) if controls is None else controls
    xs = simulate(p, u).xs
    energy = 0.5 * np.einsum("ti,ij,tj->t", xs, J, xs)
    return float(np.max(np.abs(energy - energy[0])))


def unwrapped_angles(qs: t.Sequence[GroupElement]) -> np.ndarray:
    """Angles atan2(q₁₀, q₀₀) made continuous across the ±π seam."""
    return np.unwrap(np.array([q.angle() for q in qs]))


PRESETS: dict[str, t.Callable[[], So2ManeuverSpec | So3AttitudeSpec]] = {
    "t1": lambda: So2ManeuverSpec(
        name="t1", N=2000, theta_i=0.0, theta_f=math.radians(90.0), omega_i=0.0, omega_f=0.08
    ),
    "t2": lambda: So2ManeuverSpec(name="t2", N=380, theta_i=0.0, theta_f=math.radians(75.0)),
    "t3": lambda: So2ManeuverSpec(
        name="t3", N=800, theta_i=math.radians(90.0), theta_f=math.radians(265.0)
    ),
    "so3-rest-to-rest": lambda: So3AttitudeSpec(
        name="so3-rest-to-rest",
        h=0.1,
        N=50,
        J=[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]],
        u_max=0.5,
        R_f=exp(AlgebraVector(GroupKind.SO3, [0.0, 0.0, math.radians(30.0)])).m.tolist(),
        w_R=10.0,
        w_omega=10.0,
    ),
}


def preset(name: str) -> So2ManeuverSpec | So3AttitudeSpec:
    """
    Raises:
        InvalidConfig: for an unknown preset name.
    """
    if name not in PRESETS:
        raise InvalidConfig(f"Unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return PRESETS[name]()
