"""
Partial derivatives of the problem maps: the analytic hooks when a problem supplies
them, central finite differences otherwise. Group derivatives are left-trivialized.
"""

import numpy as np

from liepmp.lie.group import GroupElement, Matrix, Vector, log
from liepmp.model.problem import FixedInitSubmanifold, ImplicitStepSpec, LieOCP
from liepmp.util.fd import group_jacobian, jacobian


def fd_step_partials(p: LieOCP, t: int, q: GroupElement, x: Vector) -> tuple[Matrix, Matrix]:
    """(Sq, Sx) of an explicit step by differences of log(s⁻¹·s(q', x'))."""
    assert not isinstance(p.step, ImplicitStepSpec)
    step = p.step
    s_inv = step(t, q, x).inverse()
    Sq = group_jacobian(lambda qq: log(s_inv @ step(t, qq, x)).v, q)
    Sx = jacobian(lambda xx: log(s_inv @ step(t, q, xx)).v, x)
    return Sq, Sx


def step_partials(p: LieOCP, t: int, q: GroupElement, x: Vector) -> tuple[Matrix, Matrix]:
    if p.step_partials is not None:
        Sq, Sx = p.step_partials(t, q, x)
        return np.asarray(Sq, dtype=float), np.asarray(Sx, dtype=float)
    return fd_step_partials(p, t, q, x)


def fd_euclid_partials(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector
) -> tuple[Matrix, Matrix, Matrix]:
    f = p.euclid
    Fq = group_jacobian(lambda qq: f(t, qq, x, u), q)
    Fx = jacobian(lambda xx: f(t, q, xx, u), x)
    Fu = jacobian(lambda uu: f(t, q, x, uu), u)
    return Fq, Fx, Fu


def euclid_partials(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector
) -> tuple[Matrix, Matrix, Matrix]:
    if p.euclid_partials is not None:
        Fq, Fx, Fu = p.euclid_partials(t, q, x, u)
        return (
            np.asarray(Fq, dtype=float).reshape(p.n_x, p.n_q),
            np.asarray(Fx, dtype=float).reshape(p.n_x, p.n_x),
            np.asarray(Fu, dtype=float).reshape(p.n_x, p.n_u),
        )
    return fd_euclid_partials(p, t, q, x, u)


def fd_stage_cost_partials(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector
) -> tuple[Vector, Vector, Vector]:
    c = p.stage_cost
    cq = group_jacobian(lambda qq: c(t, qq, x, u), q)[0]
    cx = jacobian(lambda xx: c(t, q, xx, u), x)[0]
    cu = jacobian(lambda uu: c(t, q, x, uu), u)[0]
    return cq, cx, cu


def stage_cost_partials(
    p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector
) -> tuple[Vector, Vector, Vector]:
    if p.stage_cost_partials is not None:
        cq, cx, cu = p.stage_cost_partials(t, q, x, u)
        return (
            np.asarray(cq, dtype=float).reshape(p.n_q),
            np.asarray(cx, dtype=float).reshape(p.n_x),
            np.asarray(cu, dtype=float).reshape(p.n_u),
        )
    return fd_stage_cost_partials(p, t, q, x, u)


def fd_final_cost_partials(p: LieOCP, q: GroupElement, x: Vector) -> tuple[Vector, Vector]:
    if p.final_cost is None:
        return np.zeros(p.n_q), np.zeros(p.n_x)
    cN = p.final_cost
    return group_jacobian(lambda qq: cN(qq, x), q)[0], jacobian(lambda xx: cN(q, xx), x)[0]


def final_cost_partials(p: LieOCP, q: GroupElement, x: Vector) -> tuple[Vector, Vector]:
    if p.final_cost is None:
        return np.zeros(p.n_q), np.zeros(p.n_x)
    if p.final_cost_partials is not None:
        cq, cx = p.final_cost_partials(q, x)
        return np.asarray(cq, dtype=float).reshape(p.n_q), np.asarray(cx, dtype=float).reshape(p.n_x)
    return fd_final_cost_partials(p, q, x)


def fd_constraint_partials(
    p: LieOCP, t: int, q: GroupElement, x: Vector
) -> tuple[Matrix, Matrix]:
    n_g = p.constraint_count(t)
    if n_g == 0:
        return np.zeros((0, p.n_q)), np.zeros((0, p.n_x))
    Gq = group_jacobian(lambda qq: p.constraint(t, qq, x), q)
    Gx = jacobian(lambda xx: p.constraint(t, q, xx), x)
    return Gq, Gx


def constraint_partials(p: LieOCP, t: int, q: GroupElement, x: Vector) -> tuple[Matrix, Matrix]:
    n_g = p.constraint_count(t)
    if n_g == 0:
        return np.zeros((0, p.n_q)), np.zeros((0, p.n_x))
    assert p.constraints is not None
    if p.constraints.partials is not None:
        Gq, Gx = p.constraints.partials(t, q, x, p.constraints.level)
        return (
            np.asarray(Gq, dtype=float).reshape(n_g, p.n_q),
            np.asarray(Gx, dtype=float).reshape(n_g, p.n_x),
        )
    return fd_constraint_partials(p, t, q, x)


def submersion_partials(
    boundary: FixedInitSubmanifold, q: GroupElement, x: Vector
) -> tuple[Matrix, Matrix]:
    if boundary.b_fin_partials is not None:
        Bq, Bx = boundary.b_fin_partials(q, x)
        return (
            np.asarray(Bq, dtype=float).reshape(-1, q.kind.n_q),
            np.asarray(Bx, dtype=float).reshape(-1, x.size),
        )
    Bq = group_jacobian(lambda qq: boundary.b_fin(qq, x), q)
    Bx = jacobian(lambda xx: boundary.b_fin(q, xx), x)
    return Bq, Bx
