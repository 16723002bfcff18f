import numpy as np

from liepmp.errors import InvalidSpec, SingularJacobian
from liepmp.implicit.step import residual_partials
from liepmp.lie.group import CoAlgebraVector, GroupElement, Vector, adjoint_matrix
from liepmp.model import partials
from liepmp.model.problem import ImplicitStepSpec, LieOCP
from liepmp.pmp.costate import Costate


def implicit_adjoint_step(
    p: LieOCP,
    t: int,
    costate: Costate,
    mu: Vector,
    q: GroupElement,
    x: Vector,
    u: Vector,
    s: GroupElement,
    nu: float,
) -> Costate:
    """
    Adjoint step for a step given by v_t(s, q, x) = 0, with s held as an explicit
    argument of H:

        ρ^{t-1} = Ad*_{s⁻¹} ρᵗ + D_qH - (Ds v⁻¹ Dq v)ᵀ D_sH + Gqᵀ μᵗ
        ξ^{t-1} = D_xH - (Ds v⁻¹ Dx v)ᵀ D_sH + Gxᵀ μᵗ

    where the partials of H are taken at fixed s, so D_sH = ρᵗ (the trivialized
    derivative of ⟨ζ, log s⟩) and D_qH, D_xH carry only the stage cost and the
    Euclidean dynamics.

    Raises:
        SingularJacobian: if Ds v is not invertible at (s, q, x).
    """
    if not isinstance(p.step, ImplicitStepSpec):
        raise InvalidSpec(f"Problem '{p.name}' has an explicit step")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float)).reshape(p.constraint_count(t))

    Ds, Dq, Dx = residual_partials(p.step, s, q, x, t=t)
    try:
        Ds_inv_T = np.linalg.inv(Ds).T
    except np.linalg.LinAlgError as e:
        raise SingularJacobian(f"Ds v singular at t={t}") from e

    Fq, Fx, _ = partials.euclid_partials(p, t, q, x, u)
    cq, cx, _ = partials.stage_cost_partials(p, t, q, x, u)
    Gq, Gx = partials.constraint_partials(p, t, q, x)

    d_s = costate.rho.c
    correction = Ds_inv_T @ d_s
    rho_prev = (
        adjoint_matrix(s.inverse()).T @ costate.rho.c
        + nu * cq
        + Fq.T @ costate.xi
        - Dq.T @ correction
        + Gq.T @ mu
    )
    xi_prev = nu * cx + Fx.T @ costate.xi - Dx.T @ correction + Gx.T @ mu
    return Costate(CoAlgebraVector(q.kind, rho_prev), xi_prev)

