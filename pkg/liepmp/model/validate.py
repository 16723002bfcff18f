"""
Problem validation on a deterministic sample grid: dimensions, control set
geometry, the branch domain of the step logarithm, and analytic derivative hooks
against central finite differences.
"""

import numpy as np

from liepmp.errors import InvalidGroupElement, LiePMPError, LogBranchCut
from liepmp.implicit.step import residual_partials
from liepmp.lie.group import AlgebraVector, GroupElement, Vector, exp, log
from liepmp.log import liepmpLog
from liepmp.model import partials
from liepmp.model.dynamics import step_element
from liepmp.model.problem import (
    FixedBoth,
    FixedInitSubmanifold,
    ImplicitStepSpec,
    LieOCP,
)
from liepmp.model.reports import Issue, ValidationReport
from liepmp.util.fd import group_jacobian, jacobian, relative_error

DERIVATIVE_TOL = 1e-5
SAMPLE_POINTS = 5
SAMPLE_SEED = 0


def sample_control(p: LieOCP, rng: np.random.Generator) -> Vector:
    lo = np.where(np.isfinite(p.control_set.lo), p.control_set.lo, -1.0)
    hi = np.where(np.isfinite(p.control_set.hi), p.control_set.hi, 1.0)
    return rng.uniform(lo, hi)


def sample_state(p: LieOCP, rng: np.random.Generator) -> tuple[GroupElement, Vector]:
    """A random group element near the initial orientation and a state within state_scale."""
    q0, _ = p.initial_state()
    q = q0 @ exp(AlgebraVector(p.kind, rng.uniform(-1.0, 1.0, p.n_q)))
    x = p.state_scale * rng.uniform(-1.0, 1.0, p.n_x)
    return q, x


def sample_times(p: LieOCP) -> list[int]:
    return sorted({round(k * (p.N - 1) / max(1, SAMPLE_POINTS - 1)) for k in range(SAMPLE_POINTS)})


def partials_errors(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector
) -> dict[str, float]:
    """
    Relative error of every analytic derivative hook the problem supplies against
    central finite differences at one point. Hooks that are absent are skipped.
    """
    errors: dict[str, float] = {}

    if p.step_partials is not None and not p.is_implicit:
        Sq, Sx = partials.step_partials(p, t, q, x)
        Sq_fd, Sx_fd = partials.fd_step_partials(p, t, q, x)
        errors["step_q"] = relative_error(Sq, Sq_fd)
        errors["step_x"] = relative_error(Sx, Sx_fd)

    if p.euclid_partials is not None:
        analytic = partials.euclid_partials(p, t, q, x, u)
        reference = partials.fd_euclid_partials(p, t, q, x, u)
        for name, a, b in zip(("euclid_q", "euclid_x", "euclid_u"), analytic, reference):
            errors[name] = relative_error(a, b)

    if p.stage_cost_partials is not None:
        analytic = partials.stage_cost_partials(p, t, q, x, u)
        reference = partials.fd_stage_cost_partials(p, t, q, x, u)
        for name, a, b in zip(("stage_cost_q", "stage_cost_x", "stage_cost_u"), analytic, reference):
            errors[name] = relative_error(a, b)

    if p.final_cost is not None and p.final_cost_partials is not None:
        analytic = partials.final_cost_partials(p, q, x)
        reference = partials.fd_final_cost_partials(p, q, x)
        for name, a, b in zip(("final_cost_q", "final_cost_x"), analytic, reference):
            errors[name] = relative_error(a, b)

    tc = t + 1
    if p.constraints is not None and p.constraints.partials is not None and p.constraint_count(tc):
        analytic = partials.constraint_partials(p, tc, q, x)
        reference = partials.fd_constraint_partials(p, tc, q, x)
        for name, a, b in zip(("constraint_q", "constraint_x"), analytic, reference):
            errors[name] = relative_error(a, b)

    if isinstance(p.step, ImplicitStepSpec) and p.step.partials is not None:
        spec = p.step
        s = spec.initial_guess(t, q, x)
        Ds, Dq, Dx = residual_partials(spec, s, q, x, t=t)
        res = lambda ss, qq, xx: np.atleast_1d(np.asarray(spec.residual(t, ss, qq, xx), dtype=float))  # noqa: E731
        errors["implicit_s"] = relative_error(Ds, group_jacobian(lambda ss: res(ss, q, x), s))
        errors["implicit_q"] = relative_error(Dq, group_jacobian(lambda qq: res(s, qq, x), q))
        errors["implicit_x"] = relative_error(Dx, jacobian(lambda xx: res(s, q, xx), x))

    return errors


def _dimension_issues(p: LieOCP) -> list[Issue]:
    issues = []
    box = p.control_set
    if box.lo.shape != box.hi.shape or box.dim != p.n_u:
        issues.append(
            Issue(
                code="DimensionMismatch",
                message=f"Control set has dimension {box.lo.shape}/{box.hi.shape}, expected {p.n_u}",
            )
        )

    b = p.boundary
    if b.q0.kind is not p.kind or np.atleast_1d(b.x0).size != p.n_x:
        issues.append(Issue(code="DimensionMismatch", message="Initial state does not match (kind, n_x)"))
    if isinstance(b, FixedBoth) and (b.qN.kind is not p.kind or np.atleast_1d(b.xN).size != p.n_x):
        issues.append(Issue(code="DimensionMismatch", message="Final state does not match (kind, n_x)"))

    qc = p.quadratic_control
    if qc is not None and qc.weight.size != p.n_u:
        issues.append(
            Issue(code="DimensionMismatch", message=f"Quadratic weight has {qc.weight.size} entries, expected {p.n_u}")
        )
    return issues


def validate(p: LieOCP) -> ValidationReport:
    """
    Check the problem invariants; an empty report means the problem is accepted.
    Never raises: problems that cannot be evaluated are reported as issues.
    """
    issues: list[Issue] = []

    if p.N < 1:
        issues.append(Issue(code="HorizonViolation", message=f"Horizon N = {p.N}, expected N ≥ 1"))
    if not p.control_set.is_valid() and p.control_set.lo.shape == p.control_set.hi.shape:
        issues.append(Issue(code="ConvexityViolation", message="Control set has lo > hi"))
    issues += _dimension_issues(p)
    if issues:
        liepmpLog.info(f"Problem '{p.name}' rejected with {len(issues)} issue(s)")
        return ValidationReport(issues=issues)

    rng = np.random.default_rng(SAMPLE_SEED)
    worst: dict[str, float] = {}
    for t in sample_times(p):
        q, x = sample_state(p, rng)
        u = sample_control(p, rng)
        try:
            s = step_element(p, t, q, x)
            log(s)
        except (LogBranchCut, InvalidGroupElement) as e:
            issues.append(
                Issue(code="BranchDomainViolation", message=f"Step at t={t} leaves the log domain: {e}")
            )
            continue
        except LiePMPError as e:
            issues.append(Issue(code="BranchDomainViolation", message=f"Step at t={t} failed: {e}"))
            continue

        f = np.atleast_1d(np.asarray(p.euclid(t, q, x, u), dtype=float))
        if f.size != p.n_x:
            issues.append(
                Issue(code="DimensionMismatch", message=f"Euclidean map returns {f.size} entries, expected {p.n_x}")
            )
            break
        if isinstance(p.boundary, FixedInitSubmanifold):
            b_fin = np.atleast_1d(np.asarray(p.boundary.b_fin(q, x), dtype=float))
            if b_fin.size > p.n_q + p.n_x:
                issues.append(Issue(code="DimensionMismatch", message="Final submersion has too many components"))
                break

        with np.errstate(invalid="ignore"):
            for name, err in partials_errors(p, t, q, x, u).items():
                worst[name] = max(worst.get(name, 0.0), err if np.isfinite(err) else np.inf)

    for name, err in sorted(worst.items()):
        if err > DERIVATIVE_TOL:
            issues.append(
                Issue(code="DerivativeMismatch", message=f"{name}: relative error {err:.3e}")
            )

    if issues:
        liepmpLog.info(f"Problem '{p.name}' rejected with {len(issues)} issue(s)")
    return ValidationReport(issues=issues)
