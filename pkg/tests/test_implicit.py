import dataclasses
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from liepmp.demos import So2ManeuverSpec, build_so2, maneuver_step
from liepmp.errors import InvalidSpec, SingularJacobian
from liepmp.implicit import kappa_partials, residual_partials, solve_step
from liepmp.implicit.adjoint import implicit_adjoint_step
from liepmp.lie import AlgebraVector, CoAlgebraVector, GroupElement, GroupKind, exp, log
from liepmp.model.dynamics import simulate
from liepmp.model.problem import ImplicitStepSpec
from liepmp.pmp import Costate, adjoint_step
from liepmp.shooting import homotopy_solve
from liepmp.util.fd import group_jacobian, jacobian, relative_error

SO2, SO3 = GroupKind.SO2, GroupKind.SO3
H_STEP = 0.05


def explicit_as_implicit(h: float) -> ImplicitStepSpec:
    """v(s, q, x) = log(s) - arcsin(h·ω), solved by s = F(ω)."""
    return ImplicitStepSpec(
        residual=lambda t, s, q, x: log(s).v - math.asin(h * float(x[0])),
        guess=GroupElement.identity(SO2),
    )


def test_solve_step_angle():
    spec = ImplicitStepSpec(
        residual=lambda t, s, q, x: log(s).v - H_STEP * x,
        guess=GroupElement.identity(SO2),
    )
    sol = solve_step(spec, GroupElement.rotation(0.7), np.array([0.0875]))
    assert sol.s.angle() == pytest.approx(H_STEP * 0.0875, abs=1e-12)
    assert sol.residual_norm <= 1e-12

    K = kappa_partials(spec, sol.s, GroupElement.rotation(0.7), np.array([0.0875]))
    assert_allclose(K.Kx, [[H_STEP]], rtol=1e-8)
    assert_allclose(K.Kq, [[0.0]], atol=1e-10)


def test_trapezoidal_step():
    # θ = (h/2)(ω + ω'), with ω' = ω + k·θ depending on the step itself
    k = 2.0

    def residual(t, s, q, x):
        theta = log(s).v[0]
        return np.array([theta - 0.5 * H_STEP * (2 * x[0] + k * theta)])

    spec = ImplicitStepSpec(residual=residual, guess=lambda t, q, x: GroupElement.identity(SO2))
    sol = solve_step(spec, GroupElement.identity(SO2), np.array([0.08]))
    assert sol.s.angle() == pytest.approx(H_STEP * 0.08 / (1 - H_STEP * k / 2), abs=1e-12)


def test_kappa_identity():
    rng = np.random.default_rng(12)
    B = rng.normal(size=(3, 2))
    C = 0.3 * rng.normal(size=(3, 3))

    def residual(t, s, q, x):
        return log(s).v - B @ x - C @ log(q).v

    spec = ImplicitStepSpec(residual=residual, guess=GroupElement.identity(SO3))
    q = exp(AlgebraVector(SO3, [0.1, -0.2, 0.3]))
    x = np.array([0.2, -0.1])
    s = solve_step(spec, q, x).s
    K = kappa_partials(spec, s, q, x)

    Ds, Dq, Dx = residual_partials(spec, s, q, x)
    assert_allclose(Ds @ K.Kq + Dq, np.zeros((3, 3)), atol=1e-9)
    assert_allclose(Ds @ K.Kx + Dx, np.zeros((3, 2)), atol=1e-9)

    def solved(qq, xx):
        return solve_step(spec, qq, xx).s

    Kx_fd = jacobian(lambda xx: log(s.inverse() @ solved(q, xx)).v, x)
    assert relative_error(K.Kx, Kx_fd) <= 1e-5
    Kq_fd = group_jacobian(lambda qq: log(s.inverse() @ solved(qq, x)).v, q)
    assert relative_error(K.Kq, Kq_fd) <= 1e-5


def test_singular_residual():
    spec = ImplicitStepSpec(
        residual=lambda t, s, q, x: np.array([math.cos(log(s).v[0]) - 0.5 - x[0]]),
        guess=GroupElement.identity(SO2),
    )
    with pytest.raises(SingularJacobian):
        solve_step(spec, GroupElement.identity(SO2), np.array([0.0]))


def test_implicit_problem_matches_explicit():
    explicit = build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.05))
    implicit = dataclasses.replace(explicit, step=explicit_as_implicit(H_STEP), step_partials=None)

    u = np.full((10, 1), 0.02)
    a, b = simulate(explicit, u), simulate(implicit, u)
    for qa, qb in zip(a.qs, b.qs):
        assert_allclose(qa.m, qb.m, atol=1e-12)

    rng = np.random.default_rng(13)
    for t in range(1, 10):
        costate = Costate(CoAlgebraVector(SO2, [rng.normal()]), [rng.normal()])
        q, x, mu = a.qs[t], a.xs[t], [rng.normal()]
        s = maneuver_step(H_STEP, float(x[0]))
        expected = adjoint_step(explicit, t, costate, mu, q, x, u[t], -1.0)
        got = implicit_adjoint_step(implicit, t, costate, mu, q, x, u[t], s, -1.0)
        assert_allclose(got.vector(), expected.vector(), atol=1e-8)


def test_implicit_adjoint_needs_implicit_step():
    p = build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.05))
    costate = Costate(CoAlgebraVector(SO2, [1.0]), [1.0])
    q = GroupElement.identity(SO2)
    with pytest.raises(InvalidSpec):
        implicit_adjoint_step(p, 1, costate, [0.0], q, [0.0], [0.0], q, -1.0)


def test_implicit_step_partials_hook():
    h = H_STEP

    def partials(t, s, q, x):
        return np.eye(1), np.zeros((1, 1)), np.array([[-h / math.sqrt(1 - (h * x[0]) ** 2)]])

    spec = dataclasses.replace(explicit_as_implicit(h), partials=partials)
    x = np.array([0.06])
    s = solve_step(spec, GroupElement.identity(SO2), x).s
    K = kappa_partials(spec, s, GroupElement.identity(SO2), x)
    reference = jacobian(lambda xx: np.array([math.asin(h * xx[0])]), x)
    assert_allclose(K.Kx, reference, rtol=1e-8)


def test_adjoint_step_routes_implicit_steps():
    explicit = build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.05))
    implicit = dataclasses.replace(explicit, step=explicit_as_implicit(H_STEP), step_partials=None)
    u = np.full((10, 1), -0.01)
    traj = simulate(implicit, u)

    rng = np.random.default_rng(14)
    for t in (1, 5, 9):
        costate = Costate(CoAlgebraVector(SO2, [rng.normal()]), [rng.normal()])
        q, x, mu = traj.qs[t], traj.xs[t], [rng.normal()]
        s = maneuver_step(H_STEP, float(x[0]))
        routed = adjoint_step(implicit, t, costate, mu, q, x, u[t], -1.0)
        direct = implicit_adjoint_step(implicit, t, costate, mu, q, x, u[t], s, -1.0)
        assert_allclose(routed.vector(), direct.vector(), atol=1e-12)


@pytest.mark.slow
def test_implicit_solve_matches_explicit():
    explicit = build_so2(So2ManeuverSpec(name="explicit", N=50, theta_i=0.0, theta_f=0.02))
    implicit = dataclasses.replace(
        explicit, name="implicit", step=explicit_as_implicit(H_STEP), step_partials=None
    )

    a, report_a = homotopy_solve(explicit)
    b, report_b = homotopy_solve(implicit)
    assert report_a.converged and report_b.converged, report_b.message
    assert report_b.residuals.max_residual() <= 1e-9
    assert_allclose(b.controls, a.controls, rtol=0.0, atol=1e-6)
    assert b.trajectory.qs[-1].angle() == pytest.approx(0.02, abs=1e-9)
