import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from liepmp.demos import So2ManeuverSpec, build_so2
from liepmp.errors import InconsistentTrajectory
from liepmp.lie import GroupElement
from liepmp.model.dynamics import Trajectory, simulate, total_cost
from liepmp.model.problem import Box, FixedInitFreeFinal
from liepmp.model.validate import validate


@pytest.fixture
def maneuver():
    return build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.05))


def test_maneuver_accepted(maneuver, so3):
    assert validate(maneuver).accepted
    assert validate(so3).accepted


def test_horizon_violation(maneuver):
    assert "HorizonViolation" in validate(dataclasses.replace(maneuver, N=0)).codes()


def test_convexity_violation(maneuver):
    report = validate(dataclasses.replace(maneuver, control_set=Box([1.0], [-1.0])))
    assert report.codes() == {"ConvexityViolation"}


def test_dimension_mismatch(maneuver):
    report = validate(dataclasses.replace(maneuver, control_set=Box.symmetric([1.0, 1.0])))
    assert "DimensionMismatch" in report.codes()


def test_derivative_mismatch(maneuver):
    def wrong(t, q, x, u):
        return np.zeros(1), np.zeros(1), 1.1 * np.asarray(u, dtype=float)

    report = validate(dataclasses.replace(maneuver, stage_cost_partials=wrong))
    assert report.codes() == {"DerivativeMismatch"}
    assert "stage_cost_u" in report.issues[0].message


def test_branch_domain_violation(maneuver):
    # sampled momenta up to 1000 mostly reach |h·ω| ≥ 1
    report = validate(dataclasses.replace(maneuver, state_scale=1000.0))
    assert "BranchDomainViolation" in report.codes()


def test_simulate_rest(maneuver):
    traj = simulate(maneuver, np.zeros((10, 1)))
    assert len(traj) == 11
    assert_allclose(traj.xs, np.zeros((11, 1)))
    for q in traj.qs:
        assert_allclose(q.m, np.eye(2))


def test_simulate_constant_torque(maneuver):
    h, c = 0.05, 0.025
    traj = simulate(maneuver, np.full((10, 1), c))
    assert_allclose(traj.xs[:, 0], h * c * np.arange(11), rtol=1e-14)

    theta = np.cumsum([0.0] + [np.arcsin(h * w) for w in traj.xs[:-1, 0]])
    assert_allclose([q.angle() for q in traj.qs], theta, atol=1e-14)


def test_simulate_clamps(maneuver):
    clamped = simulate(maneuver, np.full((10, 1), 1.0))
    assert_allclose(clamped.xs, simulate(maneuver, np.full((10, 1), 0.025)).xs)


def test_total_cost(maneuver):
    c = 0.025
    u = np.full((10, 1), c)
    assert total_cost(maneuver, simulate(maneuver, u), u) == pytest.approx(10 * c**2 / 2, rel=1e-14)

    u = np.zeros((10, 1))
    assert total_cost(maneuver, simulate(maneuver, u), u) == 0.0


def test_total_cost_clamps_like_simulate(maneuver):
    c = 0.025
    u = np.full((10, 1), 4 * c)
    u[::2] = -1.0
    clamped = np.clip(u, -c, c)
    assert total_cost(maneuver, simulate(maneuver, u), u) == total_cost(
        maneuver, simulate(maneuver, clamped), clamped
    )
    assert total_cost(maneuver, simulate(maneuver, u), u) == pytest.approx(10 * c**2 / 2, rel=1e-14)


def test_total_cost_with_final_cost(maneuver):
    p = dataclasses.replace(
        maneuver,
        boundary=FixedInitFreeFinal(q0=GroupElement.rotation(0.0), x0=np.zeros(1)),
        final_cost=lambda q, x: 100.0 * float(x @ x),
    )
    u = np.full((10, 1), 0.01)
    expected = 10 * 0.01**2 / 2 + 100.0 * (10 * 0.05 * 0.01) ** 2
    assert total_cost(p, simulate(p, u), u) == pytest.approx(expected, rel=1e-12)


def test_inconsistent_trajectory(maneuver):
    u = np.zeros((10, 1))
    traj = simulate(maneuver, u)
    with pytest.raises(InconsistentTrajectory):
        total_cost(maneuver, Trajectory(qs=traj.qs[:-1], xs=traj.xs[:-1]), u)

    xs = traj.xs.copy()
    xs[4] += 1e-6
    with pytest.raises(InconsistentTrajectory):
        total_cost(maneuver, Trajectory(qs=traj.qs, xs=xs), u)
