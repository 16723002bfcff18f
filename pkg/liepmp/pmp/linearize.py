"""
First-order data of one time step, in hat coordinates.

For the step direction a = log(s_t(q, x)) and T the left-trivialized derivative of
exp at a, the step sensitivities are

    δa = Aq·η + Ax·δx,     Aq = T⁻¹·Sq,  Ax = T⁻¹·Sx,

where s⁻¹·δs = hat(Sq·η + Sx·δx) for δq = q·hat(η). Implicit steps use the
solution-map derivatives (Kq, Kx) in place of (Sq, Sx).
"""

from dataclasses import dataclass

import numpy as np

from liepmp.implicit.step import kappa_partials, solve_step
from liepmp.lie.coadjoint import dexp_left_matrix
from liepmp.lie.group import AlgebraVector, GroupElement, Matrix, Vector, adjoint_matrix, log
from liepmp.model import partials
from liepmp.model.problem import ImplicitStepSpec, LieOCP


@dataclass(frozen=True)
class StateLinearization:
    """The part of a step's first-order data that does not depend on the control"""

    t: int
    q: GroupElement
    x: Vector
    s: GroupElement
    a: AlgebraVector
    T: Matrix
    Ad_inv: Matrix  # Ad_{s⁻¹}
    Aq: Matrix
    Ax: Matrix
    g: Vector
    Gq: Matrix
    Gx: Matrix


@dataclass(frozen=True)
class InputLinearization:
    """The control-dependent part: Euclidean dynamics and stage cost with their partials"""

    u: Vector
    f: Vector
    Fq: Matrix
    Fx: Matrix
    Fu: Matrix
    c: float
    cq: Vector
    cx: Vector
    cu: Vector

    def same_adjoint_data(self, other: "InputLinearization") -> bool:
        """Whether both give identical coefficients in the adjoint recursion."""
        return all(
            np.array_equal(a, b)
            for a, b in (
                (self.Fq, other.Fq),
                (self.Fx, other.Fx),
                (self.cq, other.cq),
                (self.cx, other.cx),
            )
        )


@dataclass(frozen=True)
class StepLinearization:
    state: StateLinearization
    input: InputLinearization


def linearize_state(
    p: LieOCP, t: int, q: GroupElement, x: Vector, *, constraint_time: int | None = None
) -> StateLinearization:
    """
    Step data at (t, q, x). Constraints are taken at `constraint_time`, which
    defaults to t (constraints exist for t = 1..N only).

    Raises:
        LogBranchCut: if the step leaves the domain of the logarithm.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(p.step, ImplicitStepSpec):
        s = solve_step(p.step, q, x, t=t).s
        K = kappa_partials(p.step, s, q, x, t=t)
        Sq, Sx = K.Kq, K.Kx
    else:
        s = p.step(t, q, x)
        Sq, Sx = partials.step_partials(p, t, q, x)

    a = log(s)
    T = dexp_left_matrix(p.kind, a.v)
    Aq = np.linalg.solve(T, np.asarray(Sq, dtype=float).reshape(p.n_q, p.n_q))
    Ax = np.linalg.solve(T, np.asarray(Sx, dtype=float).reshape(p.n_q, p.n_x))

    tc = t if constraint_time is None else constraint_time
    g = p.constraint(tc, q, x)
    Gq, Gx = partials.constraint_partials(p, tc, q, x)
    return StateLinearization(
        t=t,
        q=q,
        x=x,
        s=s,
        a=a,
        T=T,
        Ad_inv=adjoint_matrix(s.inverse()),
        Aq=Aq,
        Ax=Ax,
        g=g,
        Gq=Gq,
        Gx=Gx,
    )


def linearize_input(p: LieOCP, state: StateLinearization, u: Vector) -> InputLinearization:
    t, q, x = state.t, state.q, state.x
    u = np.atleast_1d(np.asarray(u, dtype=float))
    Fq, Fx, Fu = partials.euclid_partials(p, t, q, x, u)
    cq, cx, cu = partials.stage_cost_partials(p, t, q, x, u)
    return InputLinearization(
        u=u,
        f=np.atleast_1d(np.asarray(p.euclid(t, q, x, u), dtype=float)),
        Fq=Fq,
        Fx=Fx,
        Fu=Fu,
        c=float(p.stage_cost(t, q, x, u)),
        cq=cq,
        cx=cx,
        cu=cu,
    )


def linearize(p: LieOCP, t: int, q: GroupElement, x: Vector, u: Vector) -> StepLinearization:
    state = linearize_state(p, t, q, x)
    return StepLinearization(state=state, input=linearize_input(p, state, u))
