"""
The adjoint recursion

    ρ^{t-1} = Ad*_{s_t⁻¹} ρᵗ + D_qH + Gqᵀ μᵗ,      ξ^{t-1} = D_xH + Gxᵀ μᵗ,

with ζᵗ = dexp_dual(a_t, ρᵗ) inside H, and its forward rearrangement used by
the shooting sweep: the recursion is linear in (ρᵗ, ξᵗ), so the costate at t is
recovered from the one at t-1 by a linear solve.
"""

import typing as t

import numpy as np

from liepmp.errors import SingularJacobian
from liepmp.implicit import adjoint as implicit_adjoint
from liepmp.lie.group import CoAlgebraVector, GroupElement, Matrix, Vector
from liepmp.log import liepmpLog
from liepmp.model.problem import ImplicitStepSpec, LieOCP
from liepmp.pmp.control import control_argmax
from liepmp.pmp.costate import Costate
from liepmp.pmp.linearize import (
    InputLinearization,
    StateLinearization,
    StepLinearization,
    linearize,
    linearize_input,
)

FIXED_POINT_MAX_ITER = 20
FIXED_POINT_TOL = 1e-14


def backward(
    st: StateLinearization, inp: InputLinearization, costate: Costate, mu: Vector, nu: float
) -> Costate:
    zeta = st.T.T @ costate.rho.c
    xi = costate.xi
    d_q = nu * inp.cq + st.Aq.T @ zeta + inp.Fq.T @ xi
    d_x = nu * inp.cx + st.Ax.T @ zeta + inp.Fx.T @ xi
    rho_prev = st.Ad_inv.T @ costate.rho.c + d_q + st.Gq.T @ mu
    xi_prev = d_x + st.Gx.T @ mu
    return Costate(CoAlgebraVector(costate.rho.kind, rho_prev), xi_prev)


def backward_step(p: LieOCP, lin: StepLinearization, costate: Costate, mu: Vector, nu: float) -> Costate:
    """
    One backward adjoint step at the linearization point. Implicit steps keep s
    as an explicit argument of H and correct through Ds v⁻¹ rather than going
    through the solved partials of s(q, x).
    """
    st = lin.state
    if isinstance(p.step, ImplicitStepSpec):
        return implicit_adjoint.implicit_adjoint_step(p, st.t, costate, mu, st.q, st.x, lin.input.u, st.s, nu)
    return backward(st, lin.input, costate, mu, nu)


def adjoint_step(
    p: LieOCP,
    t: int,
    costate: Costate,
    mu: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    nu: float,
) -> Costate:
    """
    (ρᵗ, ξᵗ) ↦ (ρ^{t-1}, ξ^{t-1}) for t in 1..N-1, with the state (q_t, x_t, u_t).

    Raises:
        LogBranchCut: if s_t(q, x) is outside the domain of the logarithm.
    """
    if not 1 <= t <= p.N - 1:
        raise ValueError(f"Adjoint step defined for t in 1..{p.N - 1}, got {t}")
    mu = np.atleast_1d(np.asarray(mu, dtype=float)).reshape(p.constraint_count(t))
    return backward_step(p, linearize(p, t, q, x, u), costate, mu, nu)


def _forward_matrix(st: StateLinearization, inp: InputLinearization) -> Matrix:
    top = np.hstack([st.Ad_inv.T + st.Aq.T @ st.T.T, inp.Fq.T])
    bottom = np.hstack([st.Ax.T @ st.T.T, inp.Fx.T])
    return np.vstack([top, bottom])


def forward(
    st: StateLinearization, inp: InputLinearization, previous: Costate, mu: Vector, nu: float
) -> Costate:
    """
    Solve the adjoint recursion at t for (ρᵗ, ξᵗ) given (ρ^{t-1}, ξ^{t-1}).

    Raises:
        SingularJacobian: if the recursion is not invertible at this step.
    """
    n_q = st.Aq.shape[0]
    rhs = np.concatenate(
        [
            previous.rho.c - nu * inp.cq - st.Gq.T @ mu,
            previous.xi - nu * inp.cx - st.Gx.T @ mu,
        ]
    )
    try:
        sol = np.linalg.solve(_forward_matrix(st, inp), rhs)
    except np.linalg.LinAlgError as e:
        raise SingularJacobian(f"Adjoint recursion not invertible at t={st.t}") from e
    return Costate(CoAlgebraVector(previous.rho.kind, sol[:n_q]), sol[n_q:])


def forward_adjoint_step(
    p: LieOCP,
    st: StateLinearization,
    previous: Costate,
    mu: Vector,
    nu: float,
    *,
    control: t.Callable[[Vector], Vector] | None = None,
) -> tuple[Costate, InputLinearization]:
    """
    Costate at t from the one at t-1 when u_t is itself chosen from ξᵗ. The
    coupling is resolved by fixed-point iteration, which ends after one solve
    whenever the adjoint coefficients do not depend on u.
    """
    if control is None:
        control = lambda xi: control_argmax(p, st.t, xi, st.q, st.x, nu)  # noqa: E731

    inp = linearize_input(p, st, control(previous.xi))
    costate = forward(st, inp, previous, mu, nu)
    for it in range(FIXED_POINT_MAX_ITER):
        u = control(costate.xi)
        if np.max(np.abs(u - inp.u), initial=0.0) <= FIXED_POINT_TOL:
            break
        new_inp = linearize_input(p, st, u)
        if new_inp.same_adjoint_data(inp):
            return costate, new_inp
        inp = new_inp
        costate = forward(st, inp, previous, mu, nu)
    else:
        liepmpLog.debug(f"control/costate fixed point at t={st.t} not settled")
    return costate, inp
