import math
import time
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from liepmp.demos import (
    PRESETS,
    So2ManeuverSpec,
    So3AttitudeSpec,
    build,
    build_so2,
    build_so3,
    energy_drift,
    maneuver_defaults,
    maneuver_step,
    preset,
    problem_spec,
    unwrapped_angles,
)
from liepmp.errors import InvalidConfig, InvalidSpec, LogBranchCut
from liepmp.lie import GroupElement, GroupKind, log
from liepmp.model.dynamics import simulate
from liepmp.model.problem import FixedBoth, FixedInitFreeFinal
from liepmp.oracle import equivariance_check
from liepmp.shooting import SolverOptions, homotopy_solve, solve

PROBLEMS = Path(__file__).parent.parent / "docs" / "problems"


def test_maneuver_defaults():
    assert maneuver_defaults() == (0.05, 0.025, 0.0875)
    assert maneuver_defaults().d == 0.0875


def test_maneuver_step():
    h, omega = 0.05, 0.0875
    F = maneuver_step(h, omega)
    assert_allclose(F.m.T @ F.m, np.eye(2), atol=1e-15)
    assert np.linalg.det(F.m) == pytest.approx(1.0, abs=1e-15)
    assert_allclose(log(F).v, [math.asin(h * omega)], rtol=1e-14)
    with pytest.raises(LogBranchCut):
        maneuver_step(1.0, 1.0)


def test_build_so2_rejects_large_momentum_bound():
    with pytest.raises(InvalidSpec):
        build_so2(So2ManeuverSpec(h=0.5, d=3.0, N=10, theta_i=0.0, theta_f=1.0))
    with pytest.raises(InvalidSpec):
        build_so2(So2ManeuverSpec(h=0.5, N=10, theta_i=0.0, theta_f=1.0, omega_f=2.5))


def test_build_so2_constraint_times():
    p = build_so2(So2ManeuverSpec(N=10, theta_i=0.0, theta_f=0.1))
    assert [p.constraint_count(t) for t in range(12)] == [0] + [1] * 9 + [0, 0]
    assert isinstance(p.boundary, FixedBoth)
    assert_allclose(p.constraint(3, GroupElement.identity(GroupKind.SO2), np.array([0.0875])), [0.0], atol=1e-18)
    assert p.metadata["h"] == 0.05


def test_so2_zero_control_rest():
    p = build_so2(So2ManeuverSpec(N=10, theta_i=0.4, theta_f=0.5))
    traj = simulate(p, np.zeros((10, 1)))
    for q in traj.qs:
        assert q.angle() == pytest.approx(0.4, abs=1e-15)


def test_so3_torque_free_recursion():
    J = np.diag([1.0, 2.0, 3.0])
    h = 0.1
    spec = So3AttitudeSpec(h=h, N=5, J=J.tolist(), omega_i=[0.1, 0.2, 0.3])
    p = build_so3(spec)
    traj = simulate(p, np.zeros((5, 3)))

    omega = np.array([0.1, 0.2, 0.3])
    for t in range(1, 6):
        omega = np.linalg.solve(J, J @ omega + h * np.cross(omega, J @ omega))
        assert_allclose(traj.xs[t], omega, rtol=1e-14)


def test_so3_spherical_body_spins_uniformly():
    p = build_so3(So3AttitudeSpec(h=0.1, N=10, omega_i=[0.0, 0.0, 0.5]))
    traj = simulate(p, np.zeros((10, 3)))
    assert_allclose(traj.xs, np.tile([0.0, 0.0, 0.5], (11, 1)), atol=1e-15)
    assert_allclose(log(traj.qs[-1]).v, [0.0, 0.0, 0.5], atol=1e-12)


def test_build_so3_boundary():
    assert isinstance(build_so3(preset("so3-rest-to-rest")).boundary, FixedInitFreeFinal)
    fixed = build_so3(preset("so3-rest-to-rest").model_copy(update={"final": "fixed"}))
    assert isinstance(fixed.boundary, FixedBoth)
    assert fixed.final_cost is None


@pytest.mark.parametrize(
    "J",
    [
        [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 0.0], [0.0, 1.0]],
    ],
)
def test_build_so3_rejects_inertia(J):
    with pytest.raises(InvalidSpec):
        build_so3(So3AttitudeSpec(h=0.1, N=5, J=J))


def test_build_so3_rejects_non_rotation():
    with pytest.raises(InvalidSpec):
        build_so3(So3AttitudeSpec(h=0.1, N=5, R_f=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]))


def test_energy_drift():
    spec = So3AttitudeSpec(h=0.01, N=1000, J=np.diag([1.0, 2.0, 3.0]).tolist(), omega_i=[0.3, 0.2, 0.1])
    drift = energy_drift(spec)
    energy = 0.5 * (1.0 * 0.09 + 2.0 * 0.04 + 3.0 * 0.01)
    assert 0.0 < drift < energy
    assert energy_drift(So3AttitudeSpec(h=0.01, N=100, omega_i=[0.0, 0.0, 0.5])) <= 1e-15


def test_unwrapped_angles():
    thetas = np.linspace(math.radians(90.0), math.radians(265.0), 50)
    qs = [GroupElement.rotation(th) for th in thetas]
    assert_allclose(unwrapped_angles(qs), thetas, atol=1e-12)
    assert qs[-1].angle() < 0.0


def test_presets():
    assert sorted(PRESETS) == ["so3-rest-to-rest", "t1", "t2", "t3"]
    assert preset("t1").N == 2000
    assert preset("t1").omega_f == 0.08
    assert preset("t2").N == 380
    assert preset("t3").theta_f == pytest.approx(math.radians(265.0))
    assert preset("t2").t_f == pytest.approx(19.0)
    with pytest.raises(InvalidConfig):
        preset("t4")


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_problem_documents_match_presets(name):
    document = problem_spec.validate_json((PROBLEMS / f"{name}.json").read_text())
    expected = preset(name)
    assert type(document) is type(expected)
    got, want = document.model_dump(), expected.model_dump()
    assert got.keys() == want.keys()
    for field, value in want.items():
        if isinstance(value, str):
            assert got[field] == value, field
        else:
            assert_allclose(got[field], value, rtol=1e-15, atol=1e-15, err_msg=field)


def test_problem_spec_discriminates_on_group():
    so2 = problem_spec.validate_python({"group": "SO2", "N": 10, "theta_i": 0.0, "theta_f": 0.1})
    so3 = problem_spec.validate_json('{"group": "SO3", "h": 0.1, "N": 5}')
    assert isinstance(so2, So2ManeuverSpec) and so2.c == 0.025
    assert isinstance(so3, So3AttitudeSpec) and so3.final == "free"
    with pytest.raises(ValueError):
        problem_spec.validate_python({"group": "SE3", "h": 0.1, "N": 5})


def test_problem_documents_build():
    for path in sorted(PROBLEMS.glob("*.json")):
        p = build(problem_spec.validate_json(path.read_text()))
        assert p.name == path.stem


def _saturation(controls: np.ndarray, bound: float) -> np.ndarray:
    return np.max(np.abs(controls), axis=1) >= bound - 1e-9


def _assert_within_bounds(extremal) -> None:
    c, d = maneuver_defaults().c, maneuver_defaults().d
    assert np.max(np.abs(extremal.controls)) <= c - 1e-6
    assert np.max(np.abs(extremal.trajectory.xs[:, 0])) <= d + 1e-9


@pytest.mark.slow
def test_t2_saturates_at_both_ends(t2):
    start = time.perf_counter()
    extremal, report = homotopy_solve(t2)
    elapsed = time.perf_counter() - start
    assert report.converged, report.message
    assert elapsed <= 60.0, f"T2 took {elapsed:.1f} s"
    assert report.residuals.max_residual() <= 1e-9
    saturated = _saturation(extremal.controls, 0.025)
    edge = t2.N // 10
    assert saturated[0] and saturated[-1]
    assert saturated[:edge].any() and saturated[-edge:].any()
    assert extremal.trajectory.qs[-1].angle() == pytest.approx(math.radians(75.0), abs=1e-9)
    assert np.max(np.abs(extremal.trajectory.xs[1:-1, 0])) <= 0.0875 + 1e-7


@pytest.mark.slow
def test_t2_is_segment_invariant(t2):
    few, r_few = homotopy_solve(t2, opts=SolverOptions(segments=19))
    many, r_many = homotopy_solve(t2)
    assert r_few.converged and r_many.converged
    assert r_many.segments == 38
    assert_allclose(many.controls, few.controls, atol=1e-6)


@pytest.mark.slow
def test_t1_reaches_final_spin():
    p = build_so2(preset("t1"))
    extremal, report = homotopy_solve(p, opts=SolverOptions(threads=4))
    assert report.converged, report.message
    assert report.segments == 200
    assert extremal.trajectory.qs[-1].angle() == pytest.approx(math.radians(90.0), abs=1e-9)
    assert extremal.trajectory.xs[-1, 0] == pytest.approx(0.08, abs=1e-9)
    _assert_within_bounds(extremal)


@pytest.mark.slow
def test_t3_crosses_the_seam():
    p = build_so2(preset("t3"))
    extremal, report = homotopy_solve(p, opts=SolverOptions(threads=4))
    assert report.converged, report.message
    _assert_within_bounds(extremal)
    raw = np.array([q.angle() for q in extremal.trajectory.qs])
    unwrapped = unwrapped_angles(extremal.trajectory.qs)
    assert np.any(np.abs(np.diff(raw)) > math.pi)
    assert unwrapped[-1] - unwrapped[0] == pytest.approx(math.radians(175.0), abs=1e-9)
    assert raw[-1] - raw[0] == pytest.approx(math.radians(175.0) - 2 * math.pi, abs=1e-9)


def test_so3_rest_to_rest_solves(so3):
    extremal, report = solve(so3)
    assert report.converged, report.message
    assert report.residuals.max_residual() <= 1e-9
    assert np.max(np.abs(extremal.controls)) <= 0.5
    # the final attitude moves toward the 30° target about z
    angle = log(extremal.trajectory.qs[-1]).v
    assert 0.0 < angle[2] < math.radians(30.0)
    assert_allclose(angle[:2], [0.0, 0.0], atol=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("name, degrees", [("t2", 30.0), ("t3", -90.0)])
def test_maneuvers_are_equivariant(name, degrees):
    p = build_so2(preset(name))
    g0 = GroupElement.rotation(math.radians(degrees))
    assert equivariance_check(p, g0, SolverOptions(threads=4)) <= 1e-8
