import dataclasses
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from liepmp.demos import So2ManeuverSpec, build_so2
from liepmp.errors import BoundaryMismatch, SubmersionRankError
from liepmp.lie import AlgebraVector, CoAlgebraVector, GroupElement, GroupKind, exp
from liepmp.model import partials
from liepmp.model.dynamics import simulate
from liepmp.model.problem import FixedInitFreeFinal, FixedInitSubmanifold
from liepmp.pmp import (
    Costate,
    Multipliers,
    adjoint_step,
    check_extremal,
    complementarity_residual,
    control_argmax,
    control_choice,
    fischer_burmeister,
    hamiltonian,
    hamiltonian_partials,
    maximization_gap,
    stationarity_residual,
    transversality_free,
    transversality_submanifold,
)
from liepmp.pmp.transversality import tangent_basis
from liepmp.util.fd import group_jacobian, jacobian

SO2 = GroupKind.SO2
H_STEP = 0.05


@pytest.fixture
def maneuver():
    return build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.05))


def so2_costate(rho: float, xi: float) -> Costate:
    return Costate(CoAlgebraVector(SO2, [rho]), [xi])


def free_final(p, final_cost=None):
    q0, x0 = p.initial_state()
    return dataclasses.replace(p, boundary=FixedInitFreeFinal(q0=q0, x0=x0), final_cost=final_cost)


def test_hamiltonian_value(maneuver):
    q = GroupElement.identity(SO2)
    H = hamiltonian(maneuver, 1, CoAlgebraVector(SO2, [2.0]), [3.0], q, [0.08], [0.01], -1.0)
    expected = -0.5 * 0.01**2 + 2.0 * math.asin(H_STEP * 0.08) + 3.0 * (0.08 + H_STEP * 0.01)
    assert H == pytest.approx(expected, rel=1e-14)
    assert H == pytest.approx(0.2494500213, abs=1e-9)


def test_hamiltonian_partials(maneuver):
    q = GroupElement.rotation(0.3)
    zeta, xi, omega, u = 2.0, 3.0, 0.08, 0.01
    hp = hamiltonian_partials(maneuver, 1, CoAlgebraVector(SO2, [zeta]), [xi], q, [omega], [u], -1.0)
    assert_allclose(hp.d_zeta.v, [math.asin(H_STEP * omega)], rtol=1e-14)
    assert_allclose(hp.d_xi, [omega + H_STEP * u], rtol=1e-14)
    assert_allclose(hp.d_x, [H_STEP * zeta / math.sqrt(1 - (H_STEP * omega) ** 2) + xi], rtol=1e-14)
    assert_allclose(hp.d_u, [-u + H_STEP * xi], rtol=1e-14)
    assert_allclose(hp.d_q.c, [0.0], atol=1e-15)


def test_hamiltonian_partials_match_finite_differences(so3):
    rng = np.random.default_rng(7)
    q = exp(AlgebraVector(GroupKind.SO3, rng.normal(size=3)))
    zeta = CoAlgebraVector(GroupKind.SO3, rng.normal(size=3))
    xi, x, u = rng.normal(size=3), rng.uniform(-1, 1, 3), rng.uniform(-0.5, 0.5, 3)

    hp = hamiltonian_partials(so3, 2, zeta, xi, q, x, u, -1.0)
    assert_allclose(hp.d_x, jacobian(lambda xx: hamiltonian(so3, 2, zeta, xi, q, xx, u, -1.0), x)[0], atol=1e-7)
    assert_allclose(hp.d_u, jacobian(lambda uu: hamiltonian(so3, 2, zeta, xi, q, x, uu, -1.0), u)[0], atol=1e-7)
    assert_allclose(hp.d_q.c, group_jacobian(lambda qq: hamiltonian(so3, 2, zeta, xi, qq, x, u, -1.0), q)[0], atol=1e-7)


def test_adjoint_step_so2(maneuver):
    rng = np.random.default_rng(8)
    for _ in range(20):
        zeta, xi, mu = rng.normal(size=3)
        omega, u = rng.uniform(-0.0875, 0.0875), rng.uniform(-0.025, 0.025)
        q = GroupElement.rotation(rng.uniform(-3, 3))
        prev = adjoint_step(maneuver, 3, so2_costate(zeta, xi), [mu], q, [omega], [u], -1.0)
        assert_allclose(prev.rho.c, [zeta], rtol=1e-14)
        expected = H_STEP * zeta / math.sqrt(1 - (H_STEP * omega) ** 2) + xi + mu * omega
        assert_allclose(prev.xi, [expected], rtol=1e-14, atol=1e-15)


def test_adjoint_step_range(maneuver):
    q = GroupElement.identity(SO2)
    with pytest.raises(ValueError):
        adjoint_step(maneuver, 0, so2_costate(1.0, 1.0), [0.0], q, [0.0], [0.0], -1.0)


def test_adjoint_step_linear_when_abnormal(so3):
    rng = np.random.default_rng(9)
    q = exp(AlgebraVector(GroupKind.SO3, rng.normal(size=3)))
    x, u = rng.uniform(-1, 1, 3), rng.uniform(-0.5, 0.5, 3)
    a = Costate(CoAlgebraVector(GroupKind.SO3, rng.normal(size=3)), rng.normal(size=3))
    b = Costate(CoAlgebraVector(GroupKind.SO3, rng.normal(size=3)), rng.normal(size=3))

    def step(c):
        return adjoint_step(so3, 4, c, [], q, x, u, 0.0).vector()

    assert_allclose(step(2.0 * a + (-0.5) * b), 2.0 * step(a) - 0.5 * step(b), atol=1e-12)


def _cost_to_go(p, t0, q, x, controls):
    total = 0.0
    for t in range(t0, p.N):
        total += p.stage_cost(t, q, x, controls[t])
        s = p.step(t, q, x)
        x = p.euclid(t, q, x, controls[t])
        q = q @ s
    return total + p.final_cost(q, x)


def test_adjoint_recursion_is_the_cost_to_go_gradient(so3):
    rng = np.random.default_rng(10)
    q0 = exp(AlgebraVector(GroupKind.SO3, [0.2, -0.4, 0.1]))
    p = dataclasses.replace(so3, N=6, boundary=FixedInitFreeFinal(q0=q0, x0=np.array([0.3, -0.2, 0.1])))
    u = rng.uniform(-0.5, 0.5, (p.N, 3))
    traj = simulate(p, u)
    nu = -1.0

    cq, cx = partials.final_cost_partials(p, traj.qs[-1], traj.xs[-1])
    costate = Costate(CoAlgebraVector(GroupKind.SO3, nu * cq), nu * cx)
    for t in range(p.N - 1, 0, -1):
        costate = adjoint_step(p, t, costate, [], traj.qs[t], traj.xs[t], u[t], nu)

    q1, x1 = traj.qs[1], traj.xs[1]
    d_q = group_jacobian(lambda qq: _cost_to_go(p, 1, qq, x1, u), q1)[0]
    d_x = jacobian(lambda xx: _cost_to_go(p, 1, q1, xx, u), x1)[0]
    assert_allclose(costate.rho.c, nu * d_q, atol=1e-6)
    assert_allclose(costate.xi, nu * d_x, atol=1e-6)


def test_control_argmax(maneuver):
    q = GroupElement.identity(SO2)
    assert_allclose(control_argmax(maneuver, 0, [1000.0], q, [0.0], -1.0), [0.025])
    assert_allclose(control_argmax(maneuver, 0, [-1000.0], q, [0.0], -1.0), [-0.025])
    assert_allclose(control_argmax(maneuver, 0, [0.0], q, [0.0], -1.0), [0.0])
    assert_allclose(control_argmax(maneuver, 0, [0.2], q, [0.0], -1.0), [H_STEP * 0.2])


def test_control_argmax_abnormal(maneuver):
    q = GroupElement.identity(SO2)
    choice = control_choice(maneuver, 0, [-4.0], q, [0.0], 0.0)
    assert_allclose(choice.u, [-0.025])
    assert not choice.singular

    choice = control_choice(maneuver, 0, [0.0], q, [0.0], 0.0)
    assert_allclose(choice.u, [0.0])
    assert choice.singular


def test_control_argmax_general_path(so3):
    # same problem without the quadratic shortcut takes projected Newton
    p = dataclasses.replace(so3, quadratic_control=None)
    q = GroupElement.identity(GroupKind.SO3)
    x = np.array([0.1, -0.2, 0.3])
    for xi in (np.array([0.5, -1.0, 2.0]), np.array([100.0, -100.0, 0.1])):
        assert_allclose(
            control_argmax(p, 0, xi, q, x, -1.0),
            control_argmax(so3, 0, xi, q, x, -1.0),
            atol=1e-10,
        )


def test_stationarity_residual(maneuver):
    q = GroupElement.identity(SO2)
    zeta = CoAlgebraVector(SO2, [0.0])
    for xi in (1000.0, 0.3, -2.0):
        u = control_argmax(maneuver, 0, [xi], q, [0.0], -1.0)
        assert stationarity_residual(maneuver, 0, zeta, [xi], q, [0.0], u, -1.0) <= 1e-15
        assert maximization_gap(maneuver, 0, zeta, [xi], q, [0.0], u, -1.0) <= 1e-15

    assert stationarity_residual(maneuver, 0, zeta, [1000.0], q, [0.0], [0.0], -1.0) == pytest.approx(1.25)


def test_fischer_burmeister():
    assert fischer_burmeister(1.0, 0.5) == pytest.approx(1.5 - math.sqrt(1.25))
    assert fischer_burmeister(1.0, 0.5) == pytest.approx(0.3819660113, abs=1e-10)
    assert fischer_burmeister(0.0, 3.0) == 0.0
    assert fischer_burmeister(2.0, 0.0) == 0.0
    assert fischer_burmeister(-1.0, 0.0) != 0.0
    assert_allclose(fischer_burmeister(np.array([0.0, 1.0]), np.array([1.0, 0.0]), 1e-10), [0.0, 0.0], atol=1e-10)


def test_complementarity_residual(maneuver):
    traj = simulate(maneuver, np.zeros((maneuver.N, 1)))
    counts = [maneuver.constraint_count(t) for t in range(1, maneuver.N + 1)]
    assert complementarity_residual(maneuver, traj, Multipliers.zeros(counts)) == 0.0

    mu = [np.zeros(n) for n in counts]
    mu[2] = np.array([-1.0])
    slack = -maneuver.constraint(3, traj.qs[3], traj.xs[3])[0]
    assert slack > 0.0
    expected = 1.0 + slack - math.sqrt(1.0 + slack * slack)
    assert complementarity_residual(maneuver, traj, Multipliers(mu=tuple(mu))) == pytest.approx(expected, rel=1e-12)


def test_transversality_free(maneuver):
    p = free_final(maneuver, final_cost=lambda q, x: 0.5 * float(x @ x))
    q, x = GroupElement.rotation(0.4), np.array([0.2])
    residual = transversality_free(p, so2_costate(0.7, 0.3), [], q, x, -1.0)
    assert_allclose(residual, [0.7, 0.5], atol=1e-9)


def test_transversality_free_needs_free_final_state(maneuver):
    q, x = GroupElement.rotation(0.4), np.array([0.2])
    with pytest.raises(BoundaryMismatch):
        transversality_free(maneuver, so2_costate(0.7, 0.3), [], q, x, -1.0)


def test_transversality_submanifold(maneuver):
    q0, x0 = maneuver.initial_state()
    p = dataclasses.replace(
        maneuver,
        boundary=FixedInitSubmanifold(q0=q0, x0=x0, b_fin=lambda q, x: x - 0.1),
    )
    residual = transversality_submanifold(p, so2_costate(0.7, 0.3), [], GroupElement.rotation(0.4), [0.25], -1.0)
    assert residual.shape == (2,)
    assert residual[0] == pytest.approx(0.15)
    assert abs(residual[1]) == pytest.approx(0.7, abs=1e-9)


def test_tangent_basis():
    basis = tangent_basis(np.array([[0.0, 1.0]]), 2)
    assert_allclose(np.abs(basis[:, 0]), [1.0, 0.0], atol=1e-15)
    assert_allclose(tangent_basis(np.zeros((0, 3)), 3), np.eye(3))
    with pytest.raises(SubmersionRankError):
        tangent_basis(np.array([[1.0, 0.0], [2.0, 0.0]]), 2)


def test_check_extremal_nontriviality(maneuver):
    u = np.zeros((maneuver.N, 1))
    costates = tuple(so2_costate(0.0, 0.0) for _ in range(maneuver.N))
    multipliers = Multipliers.zeros([maneuver.constraint_count(t) for t in range(1, maneuver.N + 1)], nu=0.0)
    report = check_extremal(maneuver, simulate(maneuver, u), u, costates, multipliers)
    assert report.nontriviality_gauge == 0.0
    assert "NonTrivialityViolation" in report.flags
    assert "SingularArc" in report.flags


def test_check_extremal_consistent_costates(maneuver):
    rng = np.random.default_rng(11)
    u = rng.uniform(-0.025, 0.025, (maneuver.N, 1))
    traj = simulate(maneuver, u)
    multipliers = Multipliers(mu=tuple(np.array([-0.1 * t]) for t in range(1, maneuver.N)) + (np.zeros(0),))

    costates = [so2_costate(0.4, -0.2)]
    for t in range(maneuver.N - 1, 0, -1):
        costates.insert(
            0, adjoint_step(maneuver, t, costates[0], multipliers.at(t), traj.qs[t], traj.xs[t], u[t], -1.0)
        )
    report = check_extremal(maneuver, traj, u, tuple(costates), multipliers)
    assert report.dynamics_defect <= 1e-14
    assert report.adjoint_defect == 0.0
    assert report.max_multiplier < 0.0
    assert report.nontriviality_gauge >= 1.0
    assert report.flags == []
