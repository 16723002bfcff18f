"""
The full first-order residual stack of an extremal: state and adjoint dynamics,
boundary conditions, stationarity in u, complementary slackness with the sign
condition on μ, and the non-triviality gauge.
"""

import math

import numpy as np

from liepmp.errors import LiePMPError
from liepmp.lie.group import GroupElement, Vector, log
from liepmp.log import liepmpLog
from liepmp.model.dynamics import Trajectory, step_element
from liepmp.model.problem import FixedBoth, FixedInitFreeFinal, FixedInitSubmanifold, LieOCP
from liepmp.model.reports import ResidualReport
from liepmp.pmp.adjoint import backward_step
from liepmp.pmp.control import control_choice, maximization_gap, stationarity_from_gradient
from liepmp.pmp.costate import Costate, ExtremalTrajectory, Multipliers
from liepmp.pmp.hamiltonian import partials_at
from liepmp.pmp.linearize import StepLinearization, linearize
from liepmp.pmp.transversality import transversality_free, transversality_submanifold


def fischer_burmeister(a: float | Vector, b: float | Vector, eps: float = 0.0):
    """a + b - √(a² + b² + ε²); zero exactly when a ≥ 0, b ≥ 0 and ab = 0 (for ε = 0)."""
    return a + b - np.sqrt(a * a + b * b + eps * eps)


def complementarity_residual(p: LieOCP, trajectory: Trajectory, multipliers: Multipliers) -> float:
    """max over constrained (t, j) of |φ(-μᵗ_j, -gᵗ_j)|"""
    worst = 0.0
    for t in range(1, p.N + 1):
        if p.constraint_count(t) == 0:
            continue
        g = p.constraint(t, trajectory.qs[t], trajectory.xs[t])
        mu = multipliers.at(t)
        worst = max(worst, float(np.max(np.abs(fischer_burmeister(-mu, -g)))))
    return worst


def endpoint_defect(p: LieOCP, q: GroupElement, x: Vector) -> Vector:
    """[vee(log(q̄_N⁻¹·q)); x - x̄_N] for a fixed final state."""
    b = p.boundary
    assert isinstance(b, FixedBoth)
    return np.concatenate([log(b.qN.inverse() @ q).v, np.atleast_1d(x) - np.atleast_1d(b.xN)])


def boundary_residual(
    p: LieOCP, costate: Costate, mu_N: Vector, q: GroupElement, x: Vector, nu: float
) -> Vector:
    match p.boundary:
        case FixedBoth():
            return endpoint_defect(p, q, x)
        case FixedInitFreeFinal():
            return transversality_free(p, costate, mu_N, q, x, nu)
        case FixedInitSubmanifold():
            return transversality_submanifold(p, costate, mu_N, q, x, nu)


def _dynamics_defect(p: LieOCP, trajectory: Trajectory, controls: np.ndarray) -> float:
    q0, x0 = p.initial_state()
    worst = max(
        float(np.max(np.abs(log(q0.inverse() @ trajectory.qs[0]).v))),
        float(np.max(np.abs(trajectory.xs[0] - x0))),
    )
    for t in range(p.N):
        q, x = trajectory.qs[t], trajectory.xs[t]
        s = step_element(p, t, q, x)
        group = log((q @ s).inverse() @ trajectory.qs[t + 1]).v
        euclid = np.asarray(p.euclid(t, q, x, controls[t]), dtype=float) - trajectory.xs[t + 1]
        worst = max(worst, float(np.max(np.abs(group))), float(np.max(np.abs(euclid))))
    return worst


def check_extremal(
    p: LieOCP,
    trajectory: Trajectory,
    controls: np.ndarray,
    costates: tuple[Costate, ...],
    multipliers: Multipliers,
    *,
    gap_samples: int = 0,
) -> ResidualReport:
    """
    Per-condition maximum residuals. Never raises: a step outside the log domain
    makes the affected residuals infinite.
    """
    nu = multipliers.nu
    controls = np.asarray(controls, dtype=float).reshape(p.N, p.n_u)
    inf = math.inf

    try:
        dynamics = _dynamics_defect(p, trajectory, controls)
    except LiePMPError:
        dynamics = inf

    lins: list[StepLinearization | None] = []
    for t in range(p.N):
        try:
            lins.append(linearize(p, t, trajectory.qs[t], trajectory.xs[t], controls[t]))
        except LiePMPError:
            lins.append(None)

    adjoint, adjoint_at = 0.0, None
    for t in range(1, p.N):
        lin = lins[t]
        if lin is None:
            adjoint, adjoint_at = inf, t
            continue
        prev = backward_step(p, lin, costates[t], multipliers.at(t), nu)
        defect = float(np.max(np.abs(prev.vector() - costates[t - 1].vector())))
        if defect > adjoint:
            adjoint, adjoint_at = defect, t

    try:
        mu_N = multipliers.at(p.N)
        transversality = float(
            np.max(
                np.abs(
                    boundary_residual(
                        p, costates[-1], mu_N, trajectory.qs[-1], trajectory.xs[-1], nu
                    )
                ),
                initial=0.0,
            )
        )
    except LiePMPError:
        transversality = inf

    stationarity, gap = 0.0, None
    singular = False
    rng = np.random.default_rng(0)
    for t, lin in enumerate(lins):
        if lin is None:
            stationarity = inf
            continue
        zeta = costates[t].zeta(lin.state.a)
        d_u = partials_at(lin, zeta, costates[t].xi, nu).d_u
        stationarity = max(stationarity, stationarity_from_gradient(p, d_u, controls[t]))
        if nu == 0.0:
            q, x = trajectory.qs[t], trajectory.xs[t]
            singular |= control_choice(p, t, costates[t].xi, q, x, nu).singular
        if gap_samples:
            q, x = trajectory.qs[t], trajectory.xs[t]
            g = maximization_gap(
                p, t, zeta, costates[t].xi, q, x, controls[t], nu, rng=rng, samples=gap_samples
            )
            gap = g if gap is None else max(gap, g)

    complementarity = complementarity_residual(p, trajectory, multipliers)
    max_multiplier = max((float(np.max(m)) for m in multipliers.mu if m.size), default=0.0)

    gauge = max(
        abs(nu),
        multipliers.max_abs(),
        max((float(np.max(np.abs(c.vector()))) for c in costates), default=0.0),
    )

    flags = []
    if gauge <= 0.0:
        liepmpLog.warning("All multipliers vanish: non-triviality violated")
        flags.append("NonTrivialityViolation")
    if singular:
        flags.append("SingularArc")

    return ResidualReport(
        nu=nu,
        dynamics_defect=dynamics,
        adjoint_defect=adjoint,
        adjoint_defect_at=adjoint_at,
        transversality=transversality,
        stationarity=stationarity,
        complementarity=complementarity,
        max_multiplier=max_multiplier,
        nontriviality_gauge=gauge,
        maximization_gap=gap,
        flags=flags,
    )


def check(extremal: ExtremalTrajectory, p: LieOCP, **kwargs) -> ResidualReport:
    return check_extremal(
        p,
        extremal.trajectory,
        extremal.controls,
        extremal.costates,
        extremal.multipliers,
        **kwargs,
    )
