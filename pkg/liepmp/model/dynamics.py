import typing as t
from dataclasses import dataclass

import numpy as np

from liepmp.errors import InconsistentTrajectory
from liepmp.implicit.step import solve_step
from liepmp.lie.group import GroupElement, Vector, log
from liepmp.log import liepmpLog
from liepmp.model.problem import ImplicitStepSpec, LieOCP

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """States (q_t, x_t) for t = 0..N"""

    qs: tuple[GroupElement, ...]
    xs: np.ndarray  # (N+1, n_x)

    def __len__(self) -> int:
        return len(self.qs)


def step_element(p: LieOCP, t_: int, q: GroupElement, x: Vector) -> GroupElement:
    """s_t(q, x), solving the implicit equation when the step is given implicitly."""
    if isinstance(p.step, ImplicitStepSpec):
        return solve_step(p.step, q, x, t=t_).s
    return p.step(t_, q, x)


def as_controls(p: LieOCP, controls: t.Sequence[t.Sequence[float]] | np.ndarray) -> np.ndarray:
    u = np.asarray(controls, dtype=float)
    return u.reshape(p.N, p.n_u)


def simulate(p: LieOCP, controls: t.Sequence[t.Sequence[float]] | np.ndarray) -> Trajectory:
    """
    Run q_{t+1} = q_t·s_t(q_t, x_t), x_{t+1} = f_t(q_t, x_t, u_t) from the initial
    boundary state. Controls outside the box are clamped with a warning.

    Raises:
        LogBranchCut: if a step leaves the domain of the logarithm.
    """
    u = as_controls(p, controls)
    box = p.control_set
    if not all(box.contains(u_t) for u_t in u):
        liepmpLog.warning(f"Clamping controls outside the control set for '{p.name}'")
        u = np.array([box.clamp(u_t) for u_t in u])

    q, x = p.initial_state()
    qs = [q]
    xs = np.zeros((p.N + 1, p.n_x))
    xs[0] = x
    for t_ in range(p.N):
        s = step_element(p, t_, q, x)
        log(s)  # the step must stay inside the principal branch
        x = np.atleast_1d(np.asarray(p.euclid(t_, q, x, u[t_]), dtype=float))
        q = q @ s
        qs.append(q)
        xs[t_ + 1] = x
    return Trajectory(qs=tuple(qs), xs=xs)


def total_cost(
    p: LieOCP, trajectory: Trajectory, controls: t.Sequence[t.Sequence[float]] | np.ndarray
) -> float:
    """
    Σ c_t(q_t, x_t, u_t) + c_N(q_N, x_N), evaluated on the controls clamped to the
    control set as in `simulate`.

    Raises:
        InconsistentTrajectory: if the trajectory does not follow from the controls.
    """
    u = as_controls(p, controls)
    if len(trajectory) != p.N + 1:
        raise InconsistentTrajectory(f"Expected {p.N + 1} states, got {len(trajectory)}")

    replay = simulate(p, u)
    for t_, (qa, qb) in enumerate(zip(replay.qs, trajectory.qs)):
        defect = max(
            float(np.linalg.norm(qa.m - qb.m)),
            float(np.max(np.abs(replay.xs[t_] - trajectory.xs[t_]))),
        )
        if defect > CONSISTENCY_TOL:
            raise InconsistentTrajectory(f"State {t_} deviates by {defect:.3e}")

    u = np.array([p.control_set.clamp(u_t) for u_t in u])
    J = sum(
        float(p.stage_cost(t_, trajectory.qs[t_], trajectory.xs[t_], u[t_]))
        for t_ in range(p.N)
    )
    if p.final_cost is not None:
        J += float(p.final_cost(trajectory.qs[-1], trajectory.xs[-1]))
    return J
