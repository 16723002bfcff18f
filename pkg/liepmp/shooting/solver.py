"""
Damped-Newton multiple shooting for the boundary value problem of the discrete
maximum principle, and a continuation in the state-constraint level.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from liepmp.errors import LiePMPError, LogBranchCut, SingularJacobian
from liepmp.lie.group import Vector, log
from liepmp.log import liepmpLog
from liepmp.model.dynamics import Trajectory
from liepmp.model.problem import FixedBoth, LieOCP
from liepmp.model.reports import SolveReport, StageRecord
from liepmp.pmp.costate import ExtremalTrajectory, Multipliers
from liepmp.pmp.extremal import boundary_residual, check_extremal, fischer_burmeister
from liepmp.shooting.layout import ShootingLayout
from liepmp.shooting.options import SolverOptions
from liepmp.shooting.sweep import SegmentSweep, sweep_segment

FB_SMOOTHING = 1e-10
FD_STEP = 1e-7
ARMIJO_SLOPE = 1e-4
ARMIJO_FACTOR = 0.5
MAX_HALVINGS = 30
CHORD_CONTRACTION = 0.5
PIVOT_TOL = 1e-14
ACTIVE_TOL = 1e-10


@dataclass(frozen=True)
class Evaluation:
    z: Vector
    residual: Vector
    sweeps: tuple[SegmentSweep, ...]

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.residual), initial=0.0))


class ShootingProblem:
    """The square system F(z) = 0 for one problem, layout and ν"""

    def __init__(self, p: LieOCP, layout: ShootingLayout, nu: float = -1.0):
        self.p = p
        self.layout = layout
        self.nu = nu

    def assemble(self, z: Vector, sweeps: tuple[SegmentSweep, ...]) -> Vector:
        p, layout = self.p, self.layout
        blocks = []
        for k in range(1, layout.S):
            q_pred, x_pred = sweeps[k - 1].end_state
            q_node, x_node = layout.node_state(z, k)
            seed = layout.seed(z, k)
            pred = sweeps[k - 1].costates[-1]
            blocks += [
                log(q_pred.inverse() @ q_node).v,
                x_pred - x_node,
                pred.rho.c - seed.rho.c,
                pred.xi - seed.xi,
            ]

        q_N, x_N = sweeps[-1].end_state
        blocks.append(
            boundary_residual(p, sweeps[-1].costates[-1], layout.mu(z, p.N), q_N, x_N, self.nu)
        )

        if layout.constrained:
            g = np.concatenate([s.g[t] for s in sweeps for t in sorted(s.g)])
            blocks.append(fischer_burmeister(-layout.mu_block(z), -g, FB_SMOOTHING))
        return np.concatenate(blocks)

    def evaluate(self, z: Vector) -> Evaluation:
        """
        Raises:
            LogBranchCut: if a step or a defect leaves the domain of the logarithm.
            SingularJacobian: if the adjoint recursion cannot be inverted.
        """
        z = np.asarray(z, dtype=float)
        sweeps = tuple(
            sweep_segment(self.p, self.layout, z, k, self.nu) for k in range(self.layout.S)
        )
        return Evaluation(z=z, residual=self.assemble(z, sweeps), sweeps=sweeps)

    def _column(self, base: Evaluation, i: int) -> Vector:
        k, resume = self.layout.owner(i)
        for h in (FD_STEP * (1.0 + abs(base.z[i])), -FD_STEP * (1.0 + abs(base.z[i]))):
            z = base.z.copy()
            z[i] += h
            try:
                sweep = sweep_segment(
                    self.p, self.layout, z, k, self.nu, base=base.sweeps[k], resume=resume
                )
                sweeps = base.sweeps[:k] + (sweep,) + base.sweeps[k + 1 :]
                return (self.assemble(z, sweeps) - base.residual) / h
            except LogBranchCut:
                continue
        raise SingularJacobian(f"Column {i} cannot be differenced inside the log domain")

    def jacobian(self, base: Evaluation, threads: int = 1) -> np.ndarray:
        """
        Forward-difference Jacobian. Each column re-sweeps only the segment owning
        the perturbed unknown, from the first step it affects.
        """
        n = base.z.size
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                columns = list(pool.map(lambda i: self._column(base, i), range(n)))
        else:
            columns = [self._column(base, i) for i in range(n)]
        return np.column_stack(columns) if columns else np.zeros((base.residual.size, 0))

    def extremal(self, ev: Evaluation, multipliers: Multipliers | None = None) -> ExtremalTrajectory:
        qs, xs, costates, controls = [], [], [], []
        for sweep in ev.sweeps:
            span = self.layout.nodes[sweep.k + 1] - self.layout.nodes[sweep.k]
            qs += sweep.qs[:span]
            xs += sweep.xs[:span]
            costates += sweep.costates[:span]
            controls += sweep.controls
        q_N, x_N = ev.sweeps[-1].end_state
        qs.append(q_N)
        xs.append(x_N)
        return ExtremalTrajectory(
            trajectory=Trajectory(qs=tuple(qs), xs=np.array(xs)),
            controls=np.array(controls).reshape(self.p.N, self.p.n_u),
            costates=tuple(costates),
            multipliers=multipliers or self.layout.multipliers(ev.z, self.nu),
        )


def assemble_residual(p: LieOCP, layout: ShootingLayout, z: Vector, nu: float = -1.0) -> Vector:
    """
    Stacked residual: node continuity defects in (q, x, ρ, ξ), the boundary block,
    and smoothed Fischer–Burmeister terms for every constrained (t, j).

    Raises:
        LogBranchCut: if the iterate leaves the domain of the logarithm.
    """
    return ShootingProblem(p, layout, nu).evaluate(z).residual


def _factor(J: np.ndarray):
    lu, piv = scipy.linalg.lu_factor(J, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.size and np.min(diag) <= PIVOT_TOL * max(1.0, float(np.max(diag))):
        raise SingularJacobian(
            f"Shooting Jacobian is singular (smallest pivot {np.min(diag):.3e}); try more segments"
        )
    return lu, piv


def _try_evaluate(problem: ShootingProblem, z: Vector) -> Evaluation | None:
    try:
        return problem.evaluate(z)
    except LiePMPError:
        return None


def _newton(
    problem: ShootingProblem, z0: Vector, opts: SolverOptions
) -> tuple[Evaluation | None, int, str]:
    """
    Damped Newton with Jacobian reuse: while a full step with the last factored
    Jacobian at least halves the residual it is taken as is; otherwise the
    Jacobian is rebuilt at the current iterate and the step is line-searched.
    """
    try:
        ev = problem.evaluate(z0)
    except LiePMPError as e:
        liepmpLog.error(f"Initial iterate cannot be evaluated: {e}")
        return None, 0, f"initial iterate cannot be evaluated: {e}"

    factors = None
    for it in range(opts.max_iter + 1):
        liepmpLog.debug(f"newton {it}: |F|∞ = {ev.norm:.3e}")
        if ev.norm <= opts.tol:
            return ev, it, "converged"
        if it == opts.max_iter:
            break

        norm2 = float(np.linalg.norm(ev.residual))
        if factors is not None:
            chord = _try_evaluate(problem, ev.z + scipy.linalg.lu_solve(factors, -ev.residual))
            if chord is not None and float(np.linalg.norm(chord.residual)) <= CHORD_CONTRACTION * norm2:
                liepmpLog.debug(f"newton {it}: chord step")
                ev = chord
                continue

        factors = _factor(problem.jacobian(ev, opts.threads))
        d = scipy.linalg.lu_solve(factors, -ev.residual)

        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            trial = _try_evaluate(problem, ev.z + alpha * d)
            trial_norm2 = math.inf if trial is None else float(np.linalg.norm(trial.residual))
            if trial_norm2 <= (1.0 - ARMIJO_SLOPE * alpha) * norm2:
                break
            alpha *= ARMIJO_FACTOR
        else:
            liepmpLog.error(f"Line search stalled at |F|∞ = {ev.norm:.3e}")
            return ev, it, "line search stalled"

        liepmpLog.debug(f"newton {it}: step length {alpha}")
        ev = trial

    liepmpLog.error(f"No convergence after {opts.max_iter} iterations, |F|∞ = {ev.norm:.3e}")
    return ev, opts.max_iter, "iteration limit reached"


def _active_set(layout: ShootingLayout, z: Vector) -> list[int]:
    return [t for t in layout.constrained if np.any(layout.mu(z, t) < -ACTIVE_TOL)]


def _failed_report(layout: ShootingLayout, message: str) -> SolveReport:
    return SolveReport(
        converged=False,
        iterations=0,
        residual=math.inf,
        nu=-1.0,
        segments=layout.S,
        unknowns=layout.dim,
        message=message,
    )


def _solve(
    p: LieOCP, layout: ShootingLayout, z0: Vector, opts: SolverOptions
) -> tuple[ExtremalTrajectory | None, SolveReport, Vector]:
    problem = ShootingProblem(p, layout, nu=-1.0)
    ev, iterations, message = _newton(problem, z0, opts)
    if ev is None:
        return None, _failed_report(layout, message), z0

    extremal = problem.extremal(ev)
    mu = extremal.multipliers.mu
    residuals = check_extremal(p, extremal.trajectory, extremal.controls, extremal.costates, extremal.multipliers)

    # abnormal pass: the same costates checked against the ν = 0 conditions
    abnormal = check_extremal(
        p, extremal.trajectory, extremal.controls, extremal.costates, Multipliers(mu=mu, nu=0.0)
    )
    abnormal_residual = max(abnormal.adjoint_defect, abnormal.transversality, abnormal.stationarity)
    abnormal_candidate = abnormal_residual <= 10 * opts.tol and abnormal.nontriviality_gauge > 0.0
    if abnormal_candidate:
        liepmpLog.warning(f"'{p.name}': the costates also satisfy the abnormal (ν = 0) conditions")

    converged = ev.norm <= opts.tol
    report = SolveReport(
        converged=converged,
        iterations=iterations,
        residual=ev.norm,
        nu=-1.0,
        segments=layout.S,
        unknowns=layout.dim,
        residuals=residuals,
        abnormal_residual=abnormal_residual,
        abnormal_candidate=bool(abnormal_candidate),
        active_set=_active_set(layout, ev.z),
        message=message,
    )
    summary = f"'{p.name}': {message} after {iterations} iteration(s), |F|∞ = {ev.norm:.3e}"
    if converged:
        liepmpLog.info(summary)
    else:
        liepmpLog.error(summary)

    extremal = ExtremalTrajectory(
        trajectory=extremal.trajectory,
        controls=extremal.controls,
        costates=extremal.costates,
        multipliers=extremal.multipliers,
        residuals=residuals,
    )
    return extremal, report, ev.z


def solve(
    p: LieOCP,
    layout: ShootingLayout | None = None,
    z0: Vector | None = None,
    opts: SolverOptions | None = None,
) -> tuple[ExtremalTrajectory | None, SolveReport]:
    """
    Damped Newton on the shooting system for a normal extremal (ν = -1). A failed
    solve returns the best iterate with converged = False instead of raising.

    Raises:
        SingularJacobian: if the Newton matrix is singular; more segments may help.
    """
    opts = opts or SolverOptions()
    layout = layout or ShootingLayout.build(p, opts.segments)
    z0 = layout.initial_guess() if z0 is None else np.asarray(z0, dtype=float)
    extremal, report, _ = _solve(p, layout, z0, opts)
    return extremal, report


def _stage(
    p: LieOCP, layout: ShootingLayout, z: Vector, opts: SolverOptions, level: float, trace: list[StageRecord]
) -> tuple[ExtremalTrajectory | None, SolveReport, Vector]:
    try:
        extremal, report, z = _solve(p, layout, z, opts)
    except SingularJacobian as e:
        extremal, report = None, _failed_report(layout, str(e))
    liepmpLog.debug(f"homotopy level {level:.6g}: converged={report.converged}, |F|∞ = {report.residual:.3e}")
    trace.append(
        StageRecord(
            level=level,
            constrained=bool(layout.constrained),
            converged=report.converged,
            iterations=report.iterations,
            residual=report.residual,
        )
    )
    return extremal, report, z


def _infeasibility_hint(p: LieOCP) -> str:
    """Points out a fixed final state that violates the last state constraint."""
    if not isinstance(p.boundary, FixedBoth):
        return ""
    times = [t for t in range(1, p.N + 1) if p.constraint_count(t) > 0]
    if not times:
        return ""
    g = p.constraint(times[-1], p.boundary.qN, np.atleast_1d(p.boundary.xN))
    if np.max(g) <= 0.0:
        return ""
    return (
        f"; likely infeasible: the final boundary state violates the state constraint "
        f"at t={times[-1]} (max g = {float(np.max(g)):.3e})"
    )


def homotopy_solve(
    p: LieOCP, layout: ShootingLayout | None = None, opts: SolverOptions | None = None
) -> tuple[ExtremalTrajectory | None, SolveReport]:
    """
    Continuation in the constraint level. The first stage relaxes the level and
    drops the multipliers (μ ≡ 0); later stages tighten the level geometrically to
    the target, warm-starting each from the last. The stage trace is reported.
    """
    opts = opts or SolverOptions()
    layout = layout or ShootingLayout.build(p, opts.segments)
    if p.constraints is None or not layout.constrained:
        return solve(p, layout, None, opts)

    target = p.constraints.level
    level = target * opts.homotopy_relax
    trace: list[StageRecord] = []

    free_layout = layout.without_multipliers()
    extremal, report, z = _stage(
        p.with_constraint_level(level), free_layout, free_layout.initial_guess(), opts, level, trace
    )
    if not report.converged:
        return extremal, report.model_copy(update={"homotopy": trace})

    z = layout.transfer(z, free_layout)
    traj = extremal.trajectory
    g_max = max(float(np.max(p.constraint(t, traj.qs[t], traj.xs[t]))) for t in layout.constrained)
    if g_max <= 0.0:
        liepmpLog.info(f"'{p.name}': state constraints inactive at the relaxed solution")
        extremal, report, _ = _solve(p, layout, z, opts)
        return extremal, report.model_copy(update={"homotopy": trace})

    while len(trace) < opts.homotopy_max_stages and level > target:
        level = max(opts.homotopy_factor * level, target)
        extremal, report, z = _stage(p.with_constraint_level(level), layout, z, opts, level, trace)
        if not report.converged:
            hint = _infeasibility_hint(p)
            message = f"{report.message} at level {level:.6g}{hint}"
            liepmpLog.error(f"'{p.name}': homotopy failed: {message}")
            return extremal, report.model_copy(update={"homotopy": trace, "message": message})

    if level > target:
        message = f"stage limit reached at level {level:.6g}"
        liepmpLog.error(f"'{p.name}': {message}")
        return extremal, report.model_copy(update={"converged": False, "homotopy": trace, "message": message})
    return extremal, report.model_copy(update={"homotopy": trace})
