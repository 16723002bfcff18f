from dataclasses import dataclass

import numpy as np

from liepmp.lie.group import AlgebraVector, CoAlgebraVector, GroupElement, Vector
from liepmp.model.problem import LieOCP
from liepmp.pmp.linearize import StepLinearization, linearize


@dataclass(frozen=True)
class HamiltonianPartials:
    d_zeta: AlgebraVector
    d_xi: Vector
    d_x: Vector
    d_u: Vector
    d_q: CoAlgebraVector


def hamiltonian_value(lin: StepLinearization, zeta: CoAlgebraVector, xi: Vector, nu: float) -> float:
    return nu * lin.input.c + zeta.pair(lin.state.a) + float(np.dot(xi, lin.input.f))


def hamiltonian(
    p: LieOCP,
    t: int,
    zeta: CoAlgebraVector,
    xi: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    nu: float,
) -> float:
    """
    H = ν·c_t(q, x, u) + ⟨ζ, log s_t(q, x)⟩ + ⟨ξ, f_t(q, x, u)⟩

    Raises:
        LogBranchCut: if s_t(q, x) is outside the domain of the logarithm.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return hamiltonian_value(linearize(p, t, q, x, u), zeta, xi, nu)


def partials_at(
    lin: StepLinearization, zeta: CoAlgebraVector, xi: Vector, nu: float
) -> HamiltonianPartials:
    st, inp = lin.state, lin.input
    return HamiltonianPartials(
        d_zeta=st.a,
        d_xi=inp.f,
        d_x=nu * inp.cx + st.Ax.T @ zeta.c + inp.Fx.T @ xi,
        d_u=nu * inp.cu + inp.Fu.T @ xi,
        d_q=CoAlgebraVector(zeta.kind, nu * inp.cq + st.Aq.T @ zeta.c + inp.Fq.T @ xi),
    )


def hamiltonian_partials(
    p: LieOCP,
    t: int,
    zeta: CoAlgebraVector,
    xi: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    nu: float,
) -> HamiltonianPartials:
    """
    All five partials of H. D_qH is left-trivialized: it pairs with η for the
    variation δq = q·hat(η).

    Raises:
        LogBranchCut: if s_t(q, x) is outside the domain of the logarithm.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return partials_at(linearize(p, t, q, x, u), zeta, xi, nu)
