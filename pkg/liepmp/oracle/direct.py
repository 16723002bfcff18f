"""
A direct-transcription reference solver: minimize the penalized cost over the
control sequence alone, with the states eliminated by simulation. It shares no
code with the maximum-principle solvers beyond the problem callbacks.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
from pydantic import Field

from liepmp.errors import BoundaryMismatch, LiePMPError, NoConvergence
from liepmp.lie.group import CoAlgebraVector, GroupElement, Vector
from liepmp.log import liepmpLog
from liepmp.model.basemodel import Report
from liepmp.model.dynamics import Trajectory, as_controls, simulate, step_element, total_cost
from liepmp.model.problem import FixedBoth, FixedInitFreeFinal, LieOCP
from liepmp.pmp.adjoint import forward
from liepmp.pmp.costate import Costate, Multipliers
from liepmp.pmp.extremal import boundary_residual, endpoint_defect
from liepmp.pmp.linearize import linearize
from liepmp.util.fd import fd_step

INTERIOR_MARGIN = 1e-8
WALL_WEIGHT = 1e6


class OracleOptions(Report):
    penalty: float = Field(default=1e3, gt=0.0)
    penalty_factor: float = Field(default=10.0, gt=1.0)
    stages: int = Field(default=5, ge=1)
    kkt_tol: float = Field(default=1e-4, gt=0.0)
    max_iter: int = Field(default=5000, ge=1)


@dataclass(frozen=True)
class OracleSolution:
    controls: np.ndarray  # (N, n_u)
    trajectory: Trajectory
    cost: float
    kkt_norm: float
    penalty: float


def _suffix(p: LieOCP, t0: int, q: GroupElement, x: Vector, u: np.ndarray, penalty: float) -> float:
    """Penalized objective collected from step t0 on, starting at (q, x)."""
    value = 0.0
    for t_ in range(t0, p.N):
        value += float(p.stage_cost(t_, q, x, u[t_]))
        s = step_element(p, t_, q, x)
        x = np.atleast_1d(np.asarray(p.euclid(t_, q, x, u[t_]), dtype=float))
        q = q @ s
        g = p.constraint(t_ + 1, q, x)
        if g.size:
            value += penalty * float(np.sum(np.maximum(g, 0.0) ** 2))
    if p.final_cost is not None:
        value += float(p.final_cost(q, x))
    if isinstance(p.boundary, FixedBoth):
        value += penalty * float(np.sum(endpoint_defect(p, q, x) ** 2))
    return value


def _replay(p: LieOCP, u: np.ndarray) -> Trajectory:
    q, x = p.initial_state()
    qs, xs = [q], [x]
    for t_ in range(p.N):
        s = step_element(p, t_, q, x)
        x = np.atleast_1d(np.asarray(p.euclid(t_, q, x, u[t_]), dtype=float))
        q = q @ s
        qs.append(q)
        xs.append(x)
    return Trajectory(qs=tuple(qs), xs=np.array(xs))


def penalized_objective(p: LieOCP, u: np.ndarray, penalty: float) -> tuple[float, np.ndarray]:
    """
    Value and central-difference gradient. A perturbation of u_t only changes
    the steps from t on, so each gradient entry re-runs the suffix from the
    stored state at t.

    Raises:
        LogBranchCut: if a step leaves the domain of the logarithm.
    """
    u = as_controls(p, u)
    traj = _replay(p, u)
    value = _suffix(p, 0, traj.qs[0], traj.xs[0], u, penalty)

    grad = np.zeros_like(u)
    for t_ in range(p.N):
        q, x = traj.qs[t_], traj.xs[t_]
        for j in range(p.n_u):
            h = fd_step(u[t_, j])
            up, um = u.copy(), u.copy()
            up[t_, j] += h
            um[t_, j] -= h
            grad[t_, j] = (_suffix(p, t_, q, x, up, penalty) - _suffix(p, t_, q, x, um, penalty)) / (2 * h)
    return value, grad


class GuardedObjective:
    """
    Flat penalized objective for scipy. Points where the replay leaves the
    domain of the problem get a steep quadratic wall centered on the last point
    that stayed inside, so the line search backtracks instead of failing.
    """

    def __init__(self, p: LieOCP, penalty: float):
        self.p = p
        self.penalty = penalty
        self.inside: np.ndarray | None = None
        self.inside_value = 0.0

    def __call__(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        try:
            value, grad = penalized_objective(self.p, v.reshape(self.p.N, self.p.n_u), self.penalty)
        except LiePMPError as e:
            if self.inside is None:
                raise
            liepmpLog.debug(f"oracle trial point outside the domain: {e}")
            return self.wall(v)
        self.inside, self.inside_value = v.copy(), value
        return value, grad.ravel()

    def wall(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        weight = WALL_WEIGHT * max(1.0, abs(self.inside_value))
        d = v - self.inside
        return self.inside_value + weight * (1.0 + float(d @ d)), 2.0 * weight * d


def projected_gradient_norm(p: LieOCP, u: np.ndarray, grad: np.ndarray) -> float:
    box = p.control_set
    projected = np.clip(u - grad, box.lo, box.hi)
    return float(np.max(np.abs(u - projected), initial=0.0))


def oracle_solve(
    p: LieOCP, u0: np.ndarray | None = None, opts: OracleOptions | None = None
) -> OracleSolution:
    """
    Penalty continuation over bounded quasi-Newton minimizations, warm-started
    stage to stage.

    Raises:
        BoundaryMismatch: unless the final state is fixed or free.
        LogBranchCut: if the starting controls already leave the domain.
        NoConvergence: if the projected gradient ends above opts.kkt_tol.
    """
    opts = opts or OracleOptions()
    if not isinstance(p.boundary, (FixedBoth, FixedInitFreeFinal)):
        raise BoundaryMismatch(f"Direct oracle does not handle {type(p.boundary).__name__}")

    box = p.control_set
    u = np.zeros((p.N, p.n_u)) if u0 is None else as_controls(p, u0).copy()
    u = np.array([box.clamp(u_t) for u_t in u])
    bounds = scipy.optimize.Bounds(np.tile(box.lo, p.N), np.tile(box.hi, p.N))

    penalty = opts.penalty
    for stage in range(opts.stages):
        res = scipy.optimize.minimize(
            GuardedObjective(p, penalty),
            u.ravel(),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": opts.max_iter, "ftol": 1e-15, "gtol": 0.1 * opts.kkt_tol, "maxcor": 50},
        )
        u = res.x.reshape(p.N, p.n_u)
        liepmpLog.debug(f"oracle stage {stage}: penalty {penalty:.1e}, objective {res.fun:.12g}, {res.nit} iterations")
        if stage + 1 < opts.stages:
            penalty *= opts.penalty_factor

    _, grad = penalized_objective(p, u, penalty)
    kkt = projected_gradient_norm(p, u, grad)
    trajectory = simulate(p, u)
    solution = OracleSolution(
        controls=u,
        trajectory=trajectory,
        cost=total_cost(p, trajectory, u),
        kkt_norm=kkt,
        penalty=penalty,
    )
    if kkt > opts.kkt_tol:
        liepmpLog.error(f"Oracle projected gradient {kkt:.3e} above {opts.kkt_tol:.1e}")
        raise NoConvergence(f"Oracle projected gradient {kkt:.3e} above {opts.kkt_tol:.1e}")
    liepmpLog.info(f"'{p.name}': oracle cost {solution.cost:.12g}, projected gradient {kkt:.3e}")
    return solution


def _interior(p: LieOCP, u: Vector) -> bool:
    box = p.control_set
    return bool(np.all(u > box.lo + INTERIOR_MARGIN) and np.all(u < box.hi - INTERIOR_MARGIN))


def reconstruct_costates(
    p: LieOCP,
    trajectory: Trajectory,
    controls: np.ndarray,
    multipliers: Multipliers | None = None,
) -> tuple[Costate, ...]:
    """
    Costates (ρᵗ, ξᵗ), t = 0..N-1, for a trajectory with fixed controls. With the
    controls fixed the adjoint recursion is affine in the initial costate, which
    is fitted by linear least squares to stationarity in u at every step with
    the control strictly inside the box, and to the free-endpoint conditions.

    Raises:
        LogBranchCut: if a step leaves the domain of the logarithm.
    """
    controls = as_controls(p, controls)
    multipliers = multipliers or Multipliers.zeros([p.constraint_count(t_) for t_ in range(1, p.N + 1)])
    nu = multipliers.nu
    lins = [linearize(p, t_, trajectory.qs[t_], trajectory.xs[t_], controls[t_]) for t_ in range(p.N)]
    n = p.n_q + p.n_x

    def propagate(c0: Vector) -> list[Costate]:
        costates = [Costate(CoAlgebraVector(p.kind, c0[: p.n_q]), c0[p.n_q :])]
        for t_ in range(1, p.N):
            lin = lins[t_]
            costates.append(forward(lin.state, lin.input, costates[-1], multipliers.at(t_), nu))
        return costates

    def residual(costates: list[Costate]) -> Vector:
        rows = [
            nu * lin.input.cu + lin.input.Fu.T @ costates[t_].xi
            for t_, lin in enumerate(lins)
            if _interior(p, controls[t_])
        ]
        if isinstance(p.boundary, FixedInitFreeFinal):
            rows.append(
                boundary_residual(
                    p, costates[-1], multipliers.at(p.N), trajectory.qs[-1], trajectory.xs[-1], nu
                )
            )
        return np.concatenate(rows) if rows else np.zeros(0)

    r0 = residual(propagate(np.zeros(n)))
    if r0.size == 0:
        return tuple(propagate(np.zeros(n)))
    A = np.column_stack([residual(propagate(e)) - r0 for e in np.eye(n)])
    c0, *_ = scipy.linalg.lstsq(A, -r0)
    return tuple(propagate(c0))
